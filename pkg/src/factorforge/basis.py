"""Factor basis: the top-k eigenvectors of a generator weight Gram matrix.

The directions maximise ``||W f||`` over unit vectors ``f`` (and successively
over the orthogonal complement), i.e. they are eigenvectors of ``W.T @ W``
ordered by eigenvalue. Projection and reconstruction use this orthonormal
matrix, not ``W`` itself.
"""

import struct
from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import FormatError, InvalidArgumentError, InvalidInputError
from .formats import atomic_write_bytes, read_bytes

FCB1_MAGIC = b"FCB1"
_HEADER = struct.Struct("<4sII")
ORTHO_TOL = 1e-9
NEG_EIG_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FactorBasis:
    """``k`` orthonormal directions in a ``dim``-dimensional latent space.

    ``directions`` is ``(dim, k)``; ``eigenvalues`` is ``(k,)``, descending and
    nonnegative. Arrays are made read-only on construction.
    """

    directions: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        F = np.array(self.directions, dtype=np.float64, order="C")
        lam = np.array(self.eigenvalues, dtype=np.float64)
        if F.ndim != 2 or lam.ndim != 1 or F.shape[1] != lam.shape[0] or F.shape[1] < 1:
            raise InvalidInputError(
                f"directions {F.shape} and eigenvalues {lam.shape} are inconsistent"
            )
        if F.shape[1] > F.shape[0]:
            raise InvalidInputError(f"k={F.shape[1]} exceeds dim={F.shape[0]}")
        if not (np.isfinite(F).all() and np.isfinite(lam).all()):
            raise InvalidInputError("basis has non-finite entries")
        gram_err = np.max(np.abs(F.T @ F - np.eye(F.shape[1])))
        if gram_err > ORTHO_TOL:
            raise InvalidInputError(f"directions are not orthonormal (error {gram_err:.3g})")
        if lam.min() < 0.0:
            raise InvalidInputError("eigenvalues must be nonnegative")
        slack = matcore.TIE_TOL * max(1.0, float(lam.max()))
        if np.any(np.diff(lam) > slack):
            raise InvalidInputError("eigenvalues must be descending")
        F.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "directions", F)
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def dim(self):
        return self.directions.shape[0]

    @property
    def k(self):
        return self.directions.shape[1]

    def same_as(self, other):
        """Bitwise equality of every field."""
        return (
            self.directions.shape == other.directions.shape
            and self.directions.tobytes() == other.directions.tobytes()
            and self.eigenvalues.tobytes() == other.eigenvalues.tobytes()
        )


def compute_basis(W, k=None):
    """Top-``k`` eigenpairs of ``W.T @ W`` as a :class:`FactorBasis`.

    ``k`` defaults to the full dimension ``W.shape[1]``. Eigenvalues in
    ``[-1e-12 * max(1, lambda_1), 0)`` are rounding noise of a PSD matrix and
    are clamped to zero.
    """
    W = matcore.as_matrix(W, "W")
    d = W.shape[1]
    if k is None:
        k = d
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= d:
        raise InvalidArgumentError(f"k must be an integer in [1, {d}], got {k!r}")
    k = int(k)
    values, vectors = matcore.eigh_descending(matcore.gram(W))
    values = values[:k].copy()
    floor = -NEG_EIG_TOL * max(1.0, float(values[0]))
    if values.min() < floor:
        raise InvalidInputError(f"Gram matrix has a negative eigenvalue {values.min():.3g}")
    values[values < 0.0] = 0.0
    return FactorBasis(vectors[:, :k], values)


def encode_basis(basis):
    head = _HEADER.pack(FCB1_MAGIC, basis.dim, basis.k)
    return (
        head
        + np.ascontiguousarray(basis.eigenvalues, dtype="<f8").tobytes()
        + np.ascontiguousarray(basis.directions, dtype="<f8").tobytes()
    )


def decode_basis(payload, source="<bytes>"):
    if len(payload) < _HEADER.size:
        raise FormatError(f"{source}: truncated FCB1 header")
    magic, dim, k = _HEADER.unpack_from(payload)
    if magic != FCB1_MAGIC:
        raise FormatError(f"{source}: bad magic {magic!r}, expected {FCB1_MAGIC!r}")
    if dim < 1 or not 1 <= k <= dim:
        raise FormatError(f"{source}: invalid shape dim={dim} k={k}")
    expected = _HEADER.size + 8 * (k + dim * k)
    if len(payload) != expected:
        raise FormatError(
            f"{source}: header promises dim={dim} k={k} ({expected} bytes), file has {len(payload)}"
        )
    body = np.frombuffer(payload, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    try:
        return FactorBasis(body[k:].reshape(dim, k), body[:k])
    except InvalidInputError as exc:
        raise FormatError(f"{source}: {exc}") from exc


def save_basis(path, basis):
    atomic_write_bytes(path, encode_basis(basis))


def load_basis(path):
    return decode_basis(read_bytes(path), str(path))


def basis_io(basis, path):
    """Write ``basis`` to ``path`` and read it back."""
    save_basis(path, basis)
    return load_basis(path)
