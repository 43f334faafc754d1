"""Latent <-> factor-coordinate maps.

Modelling premise: a generator renders ``G(z) = G(A x)`` where the columns of
``A`` are independent semantic directions and ``x`` locates the sample. Here
``A`` is the orthonormal factor basis ``F`` and ``x`` the coordinates
``alpha``, so ``alpha = F.T @ w`` and ``w = F @ alpha``. Nothing in this
module checks that the directions are semantically disentangled.

Coordinates are 1-D arrays of length ``k``; batches are 2-D arrays with one
sample per row.
"""

import numpy as np

from .errors import InvalidArgumentError


def _vector(x, size, what):
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != size:
        raise InvalidArgumentError(f"{what} must have shape ({size},), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidArgumentError(f"{what} has non-finite entries")
    return arr


def as_batch(batch, dim, what="latent batch"):
    """Validate an ``(n, dim)`` batch; ``n`` may be zero."""
    arr = np.ascontiguousarray(batch, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, dim)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise InvalidArgumentError(f"{what} must have shape (n, {dim}), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidArgumentError(f"{what} has non-finite entries")
    return arr


def project(basis, w):
    """Coordinates of latent ``w`` in the basis (transpose-multiply)."""
    w = _vector(w, basis.dim, "latent")
    return basis.directions.T @ w


def reconstruct(basis, alpha):
    """Latent ``F @ alpha`` for coordinates ``alpha``."""
    alpha = _vector(alpha, basis.k, "coordinates")
    return basis.directions @ alpha


def project_batch(basis, batch):
    """Row-wise :func:`project`; returns an ``(n, k)`` array in input order."""
    batch = as_batch(batch, basis.dim)
    Ft = basis.directions.T
    out = np.empty((batch.shape[0], basis.k))
    for i, w in enumerate(batch):
        out[i] = Ft @ w
    return out


def reconstruct_batch(basis, coords):
    """Row-wise :func:`reconstruct`; rows match the single-vector path bitwise."""
    coords = as_batch(coords, basis.k, "coordinate batch")
    F = basis.directions
    out = np.empty((coords.shape[0], basis.dim))
    for i, a in enumerate(coords):
        out[i] = F @ a
    return out
