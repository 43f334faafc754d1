"""Counter-based random streams (Philox4x32-10).

Every variate is a pure function of ``(seed, stream, sample, channel)``:
the 64-bit seed is the Philox key and the counter is
``(sample lo32, sample hi32, channel, stream)``. Any sample can be
regenerated on its own, in any order, on any number of threads.
"""

import numpy as np

from . import kernels
from .errors import InvalidArgumentError

BASELINE_STREAM = 0x8000_0000
_TWO_M53 = 2.0 ** -53


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidArgumentError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise InvalidArgumentError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def _words(seed, stream, start, n, k):
    seed = check_seed(seed)
    if n < 0 or k < 0 or start < 0:
        raise InvalidArgumentError("sample counts and offsets must be nonnegative")
    if not 0 <= stream < 2 ** 32:
        raise InvalidArgumentError(f"stream id must fit in 32 bits, got {stream}")
    return kernels.philox_grid(seed, stream, start, n, k).astype(np.uint64)


def _unit(hi, lo):
    bits = ((hi << np.uint64(32)) | lo) >> np.uint64(11)
    return bits.astype(np.float64) * _TWO_M53


def uniforms(seed, stream, start, n, k):
    """``(n, k)`` uniforms on ``[0, 1)`` with 53 random bits each."""
    w = _words(seed, stream, start, n, k)
    return _unit(w[..., 0], w[..., 1])


def normals(seed, stream, start, n, k):
    """``(n, k)`` standard normals by Box-Muller on the two halves of a block."""
    w = _words(seed, stream, start, n, k)
    u1 = _unit(w[..., 0], w[..., 1])
    u2 = _unit(w[..., 2], w[..., 3])
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
