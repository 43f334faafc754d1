"""Pure numpy twins of the routines in ``_kernels.pyx``.

Same floating-point operations in the same order as the compiled loops, so
the two backends agree bit for bit. Slower, but needs no compiler.
"""

import numpy as np

BACKEND = "python"

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)


def _philox_rounds(c0, c1, c2, c3, k0, k1):
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in (c0, c1, c2, c3))
    for r in range(10):
        if r > 0:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT) ^ c1 ^ np.uint64(k0),
            p1 & _MASK,
            (p0 >> _SHIFT) ^ c3 ^ np.uint64(k1),
            p0 & _MASK,
        )
    return c0, c1, c2, c3


def philox4x32(counters, key0, key1):
    """Philox4x32-10 over an (m, 4) array of counters; returns (m, 4) words."""
    counters = np.asarray(counters, dtype=np.uint32)
    words = _philox_rounds(*(counters[:, i] for i in range(4)), int(key0), int(key1))
    return np.stack(words, axis=1).astype(np.uint32)


def philox_grid(key, stream, start, n, k):
    """Words for counters (sample, channel, stream), samples start..start+n-1."""
    key = int(key)
    samples = np.uint64(start) + np.arange(n, dtype=np.uint64)
    s = np.repeat(samples, k)
    ch = np.tile(np.arange(k, dtype=np.uint64), n)
    words = _philox_rounds(
        s & _MASK, s >> _SHIFT, ch, np.full(n * k, stream, dtype=np.uint64),
        key & 0xFFFFFFFF, key >> 32,
    )
    return np.stack(words, axis=1).astype(np.uint32).reshape(n, k, 4)


def gram(W):
    W = np.ascontiguousarray(W, dtype=np.float64)
    n = W.shape[1]
    S = np.zeros((n, n))
    iu = np.triu_indices(n)
    for row in W:
        S[iu] = S[iu] + np.outer(row, row)[iu]
    il = np.tril_indices(n, -1)
    S[il] = S.T[il]
    return S


def _seq_sum(values):
    if values.size == 0:
        return 0.0
    return float(np.cumsum(values)[-1])


def jacobi_eigh(S, rel_tol, max_sweeps, schedule):
    """Parallel-ordered cyclic Jacobi; see the compiled version for layout."""
    A = np.array(S, dtype=np.float64, copy=True)
    n = A.shape[0]
    Vt = np.eye(n)
    iu = np.triu_indices(n, 1)
    il = (iu[1], iu[0])
    frob2 = _seq_sum((A * A).ravel())
    sweeps = 0
    converged = False
    for sweep in range(max_sweeps + 1):
        up = A[iu]
        off2 = 2.0 * _seq_sum(up * up)
        if off2 <= rel_tol * rel_tol * frob2:
            converged = True
            break
        if sweep == max_sweeps:
            break
        sweeps += 1
        for pairs in schedule:
            pairs = pairs[pairs[:, 1] < n]
            P, Q = pairs[:, 0], pairs[:, 1]
            apq = A[P, Q]
            live = apq != 0.0
            P, Q, apq = P[live], Q[live], apq[live]
            if P.size == 0:
                continue
            theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            with np.errstate(over="ignore"):
                t = 1.0 / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(theta < 0.0, -t, t)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            keep = s != 0.0
            P, Q, c, s = P[keep], Q[keep], c[keep], s[keep]
            if P.size == 0:
                continue
            cc = c[:, None]
            sc = s[:, None]
            for M in (A, Vt):
                x = M[P, :]
                y = M[Q, :]
                M[P, :] = x * cc - y * sc
                M[Q, :] = x * sc + y * cc
            c0 = np.ones(n)
            c1 = np.zeros(n)
            partner = np.arange(n)
            c0[P] = c
            c0[Q] = c
            c1[P] = -s
            c1[Q] = s
            partner[P] = Q
            partner[Q] = P
            A = c0 * A + c1 * A[:, partner]
            A[P, Q] = 0.0
            A[Q, P] = 0.0
        A[il] = A[iu]
    return np.diag(A).copy(), np.ascontiguousarray(Vt.T), sweeps, converged


def mean_pairwise_euclidean(X):
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, d = X.shape
    total = 0.0
    for i in range(n - 1):
        D = X[i + 1:] - X[i]
        acc = np.zeros(n - i - 1)
        for k in range(d):
            acc = acc + D[:, k] * D[:, k]
        total = total + _seq_sum(np.sqrt(acc))
    return total / (n * (n - 1) / 2.0)
