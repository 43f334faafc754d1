"""Dense float64 linear algebra used by every other module.

Matrices and vectors are plain C-contiguous ``numpy.float64`` arrays; the
``as_matrix``/``as_vector`` helpers enforce the shape and finiteness
invariants at module boundaries.
"""

from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConvergenceError, InvalidInputError, RankDeficiencyError

JACOBI_REL_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-12
TIE_TOL = 1e-10
SIGN_TOL = 1e-12
RANK_TOL = 1e-10


def as_matrix(data, name="matrix"):
    """Validate and return ``data`` as a finite, non-empty 2-D float64 array."""
    arr = np.ascontiguousarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def as_vector(data, name="vector"):
    arr = np.ascontiguousarray(data, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def affine_rows(X, M, offset=None):
    """``X @ M.T + offset`` accumulated column by column in a fixed order.

    Every output row depends only on its input row, bit for bit, whatever
    the batch size; BLAS gives no such guarantee. ``X`` is ``(n, d)``, ``M``
    is ``(p, d)``.
    """
    X = np.asarray(X, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    n, d = X.shape
    if M.ndim != 2 or M.shape[1] != d:
        raise InvalidInputError(f"cannot apply a {M.shape} map to rows of length {d}")
    out = np.zeros((n, M.shape[0]))
    for j in range(d):
        out += X[:, j, None] * M[None, :, j]
    if offset is not None:
        out += offset
    return out


def gram(W):
    """Return ``W.T @ W``, exactly symmetric (upper triangle mirrored)."""
    return kernels.gram(as_matrix(W, "W"))


@lru_cache(maxsize=32)
def round_robin_schedule(n):
    """Disjoint index pairs covering every (p, q), p < q, once per sweep.

    Circle-method tournament over ``n`` (padded to even) players; pairs
    involving the pad index ``n`` are placeholders. Shape (rounds, n_pad/2, 2).
    """
    m = n + (n % 2)
    if m < 2:
        return np.zeros((0, 1, 2), dtype=np.int64)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            pairs.append((min(a, b), max(a, b)))
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    out = np.array(rounds, dtype=np.int64)
    out.setflags(write=False)
    return out


def _check_symmetric(S):
    if S.shape[0] != S.shape[1]:
        raise InvalidInputError(f"matrix must be square, got shape {S.shape}")
    scale = float(np.max(np.abs(S)))
    if float(np.max(np.abs(S - S.T))) > SYMMETRY_TOL * scale:
        raise InvalidInputError("matrix is not symmetric")


def _descending_order(values):
    order = np.argsort(-values, kind="stable")
    # runs of near-equal eigenvalues keep the solver's column order
    tol = TIE_TOL * max(1.0, float(np.max(np.abs(values))))
    out = []
    run = [order[0]]
    for idx in order[1:]:
        if values[run[-1]] - values[idx] <= tol:
            run.append(idx)
        else:
            out.extend(sorted(run))
            run = [idx]
    out.extend(sorted(run))
    return np.array(out, dtype=np.intp)


def fix_signs(vectors):
    """Flip columns so the first entry with magnitude > 1e-12 is positive."""
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        big = np.flatnonzero(np.abs(col) > SIGN_TOL)
        if big.size and col[big[0]] < 0:
            vectors[:, j] = -col
    return vectors


def eigh_descending(S):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues descending and
    orthonormal eigenvector columns. Each column's first entry of magnitude
    above 1e-12 is made positive. Eigenvalues within 1e-10 (scaled by
    ``max(1, |lambda|max)``) keep the order in which the solver produced
    them, so the output is a deterministic function of the input bytes.
    """
    S = as_matrix(S, "S")
    _check_symmetric(S)
    n = S.shape[0]
    diag, V, _sweeps, converged = kernels.jacobi_eigh(
        S, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS, round_robin_schedule(n)
    )
    if not converged:
        raise ConvergenceError(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    order = _descending_order(diag)
    return diag[order].copy(), fix_signs(V[:, order])


def lstsq(A, b):
    """Least-squares solution of ``A x = b`` via Householder QR.

    Raises RankDeficiencyError when the smallest |R_ii| falls below 1e-10
    times the largest.
    """
    A = as_matrix(A, "A")
    b = as_vector(b, "b")
    m, n = A.shape
    if b.shape[0] != m:
        raise InvalidInputError(f"A has {m} rows but b has length {b.shape[0]}")
    if m < n:
        raise RankDeficiencyError(f"A is {m}x{n}: fewer rows than columns")
    Q, R = np.linalg.qr(A, mode="reduced")
    pivots = np.abs(np.diag(R))
    if pivots.max() == 0.0 or pivots.min() < RANK_TOL * pivots.max():
        raise RankDeficiencyError("A does not have full column rank")
    y = Q.T @ b
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
    return x
