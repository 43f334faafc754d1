# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.

Each routine here has a numpy twin in ``_pykernels`` that performs the same
floating-point operations in the same order, so both backends return
identical bits. Keep the two files in lockstep.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.stdint cimport uint32_t, uint64_t

cnp.import_array()

cdef uint32_t PHILOX_M0 = 0xD2511F53
cdef uint32_t PHILOX_M1 = 0xCD9E8D57
cdef uint32_t PHILOX_W0 = 0x9E3779B9
cdef uint32_t PHILOX_W1 = 0xBB67AE85
cdef uint64_t LOW32 = 0xFFFFFFFF

BACKEND = "cython"


cdef inline void _philox_block(uint32_t* ctr, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t c0, c1, c2, c3
    cdef int r
    c0 = ctr[0]
    c1 = ctr[1]
    c2 = ctr[2]
    c3 = ctr[3]
    for r in range(10):
        if r > 0:
            k0 = <uint32_t>(k0 + PHILOX_W0)
            k1 = <uint32_t>(k1 + PHILOX_W1)
        p0 = <uint64_t>PHILOX_M0 * <uint64_t>c0
        p1 = <uint64_t>PHILOX_M1 * <uint64_t>c2
        c0 = <uint32_t>(p1 >> 32) ^ c1 ^ k0
        c1 = <uint32_t>p1
        c2 = <uint32_t>(p0 >> 32) ^ c3 ^ k1
        c3 = <uint32_t>p0
    ctr[0] = c0
    ctr[1] = c1
    ctr[2] = c2
    ctr[3] = c3


def philox4x32(cnp.uint32_t[:, ::1] counters, uint32_t key0, uint32_t key1):
    """Philox4x32-10 over an (m, 4) array of counters; returns (m, 4) words."""
    cdef Py_ssize_t m = counters.shape[0]
    out = np.array(counters, dtype=np.uint32, copy=True)
    cdef cnp.uint32_t[:, ::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(m):
            _philox_block(&o[i, 0], key0, key1)
    return out


def philox_grid(uint64_t key, uint32_t stream, uint64_t start,
                Py_ssize_t n, Py_ssize_t k):
    """Words for counters (sample, channel, stream), samples start..start+n-1.

    Counter layout: (sample low 32, sample high 32, channel, stream).
    """
    out = np.empty((n, k, 4), dtype=np.uint32)
    cdef cnp.uint32_t[:, :, ::1] o = out
    cdef uint32_t k0 = <uint32_t>(key & LOW32)
    cdef uint32_t k1 = <uint32_t>(key >> 32)
    cdef Py_ssize_t i, j
    cdef uint64_t s
    with nogil:
        for i in range(n):
            s = start + <uint64_t>i
            for j in range(k):
                o[i, j, 0] = <uint32_t>(s & LOW32)
                o[i, j, 1] = <uint32_t>(s >> 32)
                o[i, j, 2] = <uint32_t>j
                o[i, j, 3] = stream
                _philox_block(&o[i, j, 0], k0, k1)
    return out


def gram(const double[:, ::1] W):
    """W^T W: upper triangle by sequential accumulation over rows, mirrored."""
    cdef Py_ssize_t m = W.shape[0], n = W.shape[1]
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] S = out
    cdef Py_ssize_t r, i, j
    cdef double wi
    with nogil:
        for r in range(m):
            for i in range(n):
                wi = W[r, i]
                for j in range(i, n):
                    S[i, j] = S[i, j] + wi * W[r, j]
        for i in range(n):
            for j in range(i + 1, n):
                S[j, i] = S[i, j]
    return out


cdef inline void _rotate_rows(double* x, double* y, double c, double s,
                              Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j
    cdef double a, b
    for j in range(n):
        a = x[j]
        b = y[j]
        x[j] = a * c - b * s
        y[j] = a * s + b * c


def jacobi_eigh(const double[:, ::1] S, double rel_tol, int max_sweeps,
                const cnp.int64_t[:, :, ::1] schedule):
    """Parallel-ordered cyclic Jacobi on a symmetric matrix.

    ``schedule`` has shape (rounds, pairs, 2); index pairs within a round
    are disjoint, pairs involving the padding index n are ignored. A round
    rotates rows (J^T A), then columns inside each row via a partner index,
    and accumulates eigenvectors as rows of V^T. The lower triangle is
    re-mirrored from the upper one after every sweep.
    Returns (diagonal, V, sweeps, converged).
    """
    cdef Py_ssize_t n = S.shape[0]
    cdef Py_ssize_t rounds = schedule.shape[0], npairs = schedule.shape[1]
    a_arr = np.array(S, dtype=np.float64, copy=True)
    vt_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] A = a_arr
    cdef double[:, ::1] Vt = vt_arr
    cs_arr = np.zeros((npairs, 2), dtype=np.float64)
    cdef double[:, ::1] CS = cs_arr
    coef_arr = np.zeros((2, n), dtype=np.float64)
    cdef double[:, ::1] coef = coef_arr
    partner_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] partner = partner_arr
    row_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] row = row_arr
    cdef Py_ssize_t sweep, rnd, k, i, j, p, q
    cdef double frob2, off2, apq, theta, t, c, s
    cdef int sweeps = 0
    cdef bint converged = False, active
    cdef double* a = &A[0, 0]
    cdef double* ai

    with nogil:
        frob2 = 0.0
        for i in range(n * n):
            frob2 = frob2 + a[i] * a[i]
        for sweep in range(max_sweeps + 1):
            off2 = 0.0
            for i in range(n):
                for j in range(i + 1, n):
                    off2 = off2 + a[i * n + j] * a[i * n + j]
            off2 = 2.0 * off2
            if off2 <= rel_tol * rel_tol * frob2:
                converged = True
                break
            if sweep == max_sweeps:
                break
            sweeps += 1
            for rnd in range(rounds):
                active = False
                for j in range(n):
                    coef[0, j] = 1.0
                    coef[1, j] = 0.0
                    partner[j] = j
                for k in range(npairs):
                    p = schedule[rnd, k, 0]
                    q = schedule[rnd, k, 1]
                    CS[k, 0] = 1.0
                    CS[k, 1] = 0.0
                    if q >= n:
                        continue
                    apq = a[p * n + q]
                    if apq == 0.0:
                        continue
                    theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0.0:
                            t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    if s == 0.0:
                        continue
                    active = True
                    CS[k, 0] = c
                    CS[k, 1] = s
                    coef[0, p] = c
                    coef[1, p] = -s
                    partner[p] = q
                    coef[0, q] = c
                    coef[1, q] = s
                    partner[q] = p
                if not active:
                    continue
                for k in range(npairs):
                    s = CS[k, 1]
                    if s == 0.0:
                        continue
                    c = CS[k, 0]
                    p = schedule[rnd, k, 0]
                    q = schedule[rnd, k, 1]
                    _rotate_rows(a + p * n, a + q * n, c, s, n)
                    _rotate_rows(&Vt[p, 0], &Vt[q, 0], c, s, n)
                for i in range(n):
                    ai = a + i * n
                    for j in range(n):
                        row[j] = ai[j]
                    for j in range(n):
                        ai[j] = coef[0, j] * row[j] + coef[1, j] * row[partner[j]]
                for k in range(npairs):
                    if CS[k, 1] == 0.0:
                        continue
                    p = schedule[rnd, k, 0]
                    q = schedule[rnd, k, 1]
                    a[p * n + q] = 0.0
                    a[q * n + p] = 0.0
            for i in range(n):
                for j in range(i + 1, n):
                    a[j * n + i] = a[i * n + j]

    diag = np.empty(n, dtype=np.float64)
    for i in range(n):
        diag[i] = a[i * n + i]
    return diag, np.ascontiguousarray(vt_arr.T), sweeps, converged


def mean_pairwise_euclidean(const double[:, ::1] X):
    """Mean Euclidean distance over unordered pairs, fixed summation order."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i, j, k
    cdef double total = 0.0, row, acc, diff
    with nogil:
        for i in range(n - 1):
            row = 0.0
            for j in range(i + 1, n):
                acc = 0.0
                for k in range(d):
                    diff = X[j, k] - X[i, k]
                    acc = acc + diff * diff
                row = row + sqrt(acc)
            total = total + row
    return total / (<double>n * <double>(n - 1) / 2.0)
