"""Binary matrix files (FCK1) and atomic file output.

FCK1 layout, all little-endian::

    b"FCK1" | rows: u32 | cols: u32 | rows*cols float64, row-major

Vectors are stored as 1 x dim matrices.
"""

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import FormatError, StorageError

FCK1_MAGIC = b"FCK1"
_HEADER = struct.Struct("<4sII")


def atomic_write_bytes(path, payload):
    """Write to a sibling temp file, fsync, then rename over ``path``."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


def read_bytes(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc


def encode_matrix(M):
    M = np.ascontiguousarray(M, dtype="<f8")
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2:
        raise FormatError(f"FCK1 holds 2-D data, got {M.ndim}-D")
    rows, cols = M.shape
    return _HEADER.pack(FCK1_MAGIC, rows, cols) + M.tobytes()


def decode_matrix(payload, source="<bytes>"):
    if len(payload) < _HEADER.size:
        raise FormatError(f"{source}: truncated FCK1 header")
    magic, rows, cols = _HEADER.unpack_from(payload)
    if magic != FCK1_MAGIC:
        raise FormatError(f"{source}: bad magic {magic!r}, expected {FCK1_MAGIC!r}")
    expected = _HEADER.size + 8 * rows * cols
    if len(payload) != expected:
        raise FormatError(
            f"{source}: header promises {rows}x{cols} ({expected} bytes), file has {len(payload)}"
        )
    data = np.frombuffer(payload, dtype="<f8", offset=_HEADER.size, count=rows * cols)
    return data.astype(np.float64).reshape(rows, cols)


def write_matrix(path, M):
    atomic_write_bytes(path, encode_matrix(M))


def read_matrix(path):
    """Read an FCK1 file into a (rows, cols) float64 array."""
    return decode_matrix(read_bytes(path), str(path))


def read_vector(path):
    M = read_matrix(path)
    if M.shape[0] != 1:
        raise FormatError(f"{path}: expected a 1 x dim vector, got {M.shape}")
    return M[0]


def dump_json(obj):
    """JSON text in insertion order with shortest round-trip float repr."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    atomic_write_bytes(path, dump_json(obj).encode("utf-8"))


def read_json(path):
    try:
        return json.loads(read_bytes(path).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: malformed JSON: {exc}") from exc
