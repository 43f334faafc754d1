"""Independent reference computations for the test suite.

Nothing here imports factorforge; each oracle is the slow, obvious version.
"""

import math

import numpy as np


def gram_triple_loop(W):
    m, n = len(W), len(W[0])
    S = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for r in range(m):
                acc += W[r][i] * W[r][j]
            S[i][j] = acc
    return np.array(S)


def matvec_double_loop(M, x, offset):
    return np.array(
        [sum(M[i][j] * x[j] for j in range(len(x))) + offset[i] for i in range(len(M))]
    )


def _unit(v):
    return v / math.sqrt(float(v @ v))


def power_iteration_deflation(S, iters=200_000, tol=1e-15, refine=8):
    """All eigenpairs of a symmetric matrix by power iteration with deflation.

    The spectrum is shifted to be nonnegative so the dominant eigenvalue is
    the largest; each converged pair is polished with a few inverse-power
    steps at the Rayleigh shift and removed by Hotelling deflation.
    """
    S = np.array(S, dtype=float)
    n = S.shape[0]
    shift = float(np.abs(S).sum(axis=1).max())
    A = S + shift * np.eye(n)
    values, vectors = [], []
    start = np.random.default_rng(12345)
    for _ in range(n):
        v = _unit(start.standard_normal(n))
        lam = float(v @ A @ v)
        for _ in range(iters):
            w = A @ v
            for u in vectors:
                w -= (u @ w) * u
            w = _unit(w)
            new = float(w @ A @ w)
            done = abs(new - lam) <= tol * abs(new) and np.linalg.norm(w - v) < 1e-9
            v, lam = w, new
            if done:
                break
        for _ in range(refine):
            mu = float(v @ A @ v)
            M = A - mu * np.eye(n)
            try:
                w = np.linalg.solve(M + 1e-14 * abs(mu) * np.eye(n), v)
            except np.linalg.LinAlgError:
                break
            for u in vectors:
                w -= (u @ w) * u
            if not np.all(np.isfinite(w)):
                break
            v = _unit(w)
        lam = float(v @ A @ v)
        values.append(lam - shift)
        vectors.append(v)
    order = np.argsort(values)[::-1]
    return np.array(values)[order], np.array(vectors).T[:, order]


def principal_angle(u, v):
    c = min(1.0, abs(float(u @ v)) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return math.acos(c)


def brute_min_max(rows):
    lo = list(rows[0])
    hi = list(rows[0])
    for r in rows[1:]:
        for j, x in enumerate(r):
            if x < lo[j]:
                lo[j] = x
            if x > hi[j]:
                hi[j] = x
    return np.array(lo), np.array(hi)


def mean_pairwise_double_loop(X, dist):
    total = 0.0
    pairs = 0
    for i in range(len(X)):
        for j in range(i + 1, len(X)):
            total += dist(X[i], X[j])
            pairs += 1
    return total / pairs


def euclid(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def ks_uniform(u):
    """Kolmogorov-Smirnov statistic of a sample against U[0, 1)."""
    u = np.sort(np.asarray(u))
    n = u.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def normal_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
