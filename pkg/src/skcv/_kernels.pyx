# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Results match ``_kernels_py`` bit for bit except
``lag_sums``, whose accumulation order differs."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def knn_query(const double[:, ::1] train, const double[:, ::1] query, Py_ssize_t k):
    cdef Py_ssize_t n_train = train.shape[0]
    cdef Py_ssize_t n_query = query.shape[0]
    cdef Py_ssize_t n_feat = train.shape[1]
    if k < 1 or k > n_train:
        raise ValueError(f"k={k} outside [1, {n_train}]")
    if query.shape[1] != n_feat:
        raise ValueError("feature dimension mismatch")

    idx_arr = np.empty((n_query, k), dtype=np.int64)
    d2_arr = np.empty((n_query, k), dtype=np.float64)
    cdef long long[:, ::1] idx = idx_arr
    cdef double[:, ::1] d2 = d2_arr
    cdef Py_ssize_t q, i, f, pos, filled
    cdef double acc, diff

    with nogil:
        for q in range(n_query):
            filled = 0
            for i in range(n_train):
                acc = 0.0
                for f in range(n_feat):
                    diff = query[q, f] - train[i, f]
                    acc = acc + diff * diff
                if filled == k and acc >= d2[q, k - 1]:
                    continue
                # insertion keeps the earlier row first on equal distance
                pos = filled if filled < k else k - 1
                while pos > 0 and d2[q, pos - 1] > acc:
                    if pos < k:
                        d2[q, pos] = d2[q, pos - 1]
                        idx[q, pos] = idx[q, pos - 1]
                    pos -= 1
                d2[q, pos] = acc
                idx[q, pos] = i
                if filled < k:
                    filled += 1
    return idx_arr, d2_arr


def min_dist_to_set(const double[:, ::1] coords, const double[:, ::1] targets):
    cdef Py_ssize_t m = coords.shape[0]
    cdef Py_ssize_t t = targets.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double best, dx, dy, d

    with nogil:
        for i in range(m):
            best = INFINITY
            for j in range(t):
                dx = coords[i, 0] - targets[j, 0]
                dy = coords[i, 1] - targets[j, 1]
                d = sqrt(dx * dx + dy * dy)
                if d < best:
                    best = d
            out[i] = best
    return out_arr


def lag_sums(const double[:, ::1] coords, const double[::1] z,
             const double[::1] lows, const double[::1] highs):
    cdef Py_ssize_t m = coords.shape[0]
    cdef Py_ssize_t nb = lows.shape[0]
    counts_arr = np.zeros(nb, dtype=np.int64)
    sq_arr = np.zeros(nb, dtype=np.float64)
    cross_arr = np.zeros(nb, dtype=np.float64)
    cdef long long[::1] counts = counts_arr
    cdef double[::1] sq = sq_arr
    cdef double[::1] cross = cross_arr
    cdef Py_ssize_t i, j, b
    cdef double dx, dy, d, dz, hi_max = -INFINITY

    for b in range(nb):
        if highs[b] > hi_max:
            hi_max = highs[b]

    with nogil:
        for i in range(m):
            for j in range(i + 1, m):
                dx = coords[i, 0] - coords[j, 0]
                dy = coords[i, 1] - coords[j, 1]
                d = sqrt(dx * dx + dy * dy)
                if d > hi_max:
                    continue
                dz = z[i] - z[j]
                for b in range(nb):
                    if lows[b] <= d and d <= highs[b]:
                        counts[b] += 1
                        sq[b] += dz * dz
                        cross[b] += z[i] * z[j]
    return counts_arr, sq_arr, cross_arr


def column_stats(const double[:, ::1] x):
    """Per-column mean and population standard deviation (two-pass).

    Both sums run over the rows in order, so any loop written the same way
    reproduces the results bit for bit.
    """
    cdef Py_ssize_t n = x.shape[0], p = x.shape[1], i, f
    mean_arr = np.zeros(p, dtype=np.float64)
    std_arr = np.zeros(p, dtype=np.float64)
    cdef double[::1] mean = mean_arr
    cdef double[::1] std = std_arr
    cdef double d
    if n == 0:
        raise ValueError("need at least one row")
    with nogil:
        for i in range(n):
            for f in range(p):
                mean[f] += x[i, f]
        for f in range(p):
            mean[f] = mean[f] / n
        for i in range(n):
            for f in range(p):
                d = x[i, f] - mean[f]
                std[f] += d * d
        for f in range(p):
            std[f] = sqrt(std[f] / n)
    return mean_arr, std_arr


def standardized_knn(const double[:, ::1] train, const double[:, ::1] query,
                     Py_ssize_t k, bint standardize):
    """Fit z-scaling on ``train`` and run ``knn_query`` in the scaled space."""
    cdef Py_ssize_t n = train.shape[0], p = train.shape[1], q_n = query.shape[0]
    cdef Py_ssize_t i, f
    if query.shape[1] != p:
        raise ValueError("feature dimension mismatch")
    if not standardize:
        return knn_query(train, query, k) + (None, None)
    mean_arr, std_arr = column_stats(train)
    cdef double[::1] mean = mean_arr
    cdef double[::1] std = std_arr
    zt_arr = np.empty((n, p), dtype=np.float64)
    zq_arr = np.empty((q_n, p), dtype=np.float64)
    cdef double[:, ::1] zt = zt_arr
    cdef double[:, ::1] zq = zq_arr
    with nogil:
        for i in range(n):
            for f in range(p):
                zt[i, f] = 0.0 if std[f] == 0.0 else (train[i, f] - mean[f]) / std[f]
        for i in range(q_n):
            for f in range(p):
                zq[i, f] = 0.0 if std[f] == 0.0 else (query[i, f] - mean[f]) / std[f]
    idx, d2 = knn_query(zt_arr, zq_arr, k)
    return idx, d2, mean_arr, std_arr
