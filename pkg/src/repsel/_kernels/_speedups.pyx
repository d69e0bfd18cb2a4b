# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled histogram/MI kernels; contract identical to _fallback."""

import numpy as np

cimport numpy as cnp
from libc.math cimport log

cnp.import_array()


def joint_counts(codes_a, codes_b, int bins):
    cdef cnp.int64_t[::1] a = np.ascontiguousarray(codes_a, dtype=np.int64)
    cdef cnp.int64_t[::1] b = np.ascontiguousarray(codes_b, dtype=np.int64)
    out = np.zeros((bins, bins), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] h = out
    cdef Py_ssize_t i, n = a.shape[0]
    for i in range(n):
        h[a[i], b[i]] += 1
    return out


cdef double _mi_from_hist(cnp.int64_t[:, ::1] h, cnp.int64_t[::1] row,
                          cnp.int64_t[::1] col, int bins, double n):
    cdef double mi = 0.0, pxy
    cdef Py_ssize_t x, y
    for x in range(bins):
        row[x] = 0
        col[x] = 0
    for x in range(bins):
        for y in range(bins):
            row[x] += h[x, y]
            col[y] += h[x, y]
    for x in range(bins):
        if row[x] == 0:
            continue
        for y in range(bins):
            if h[x, y] > 0:
                pxy = h[x, y] / n
                mi += pxy * log(h[x, y] * n / (<double>row[x] * col[y]))
    return mi


def pairwise_nmi(codes, int bins):
    cdef cnp.int64_t[:, ::1] c = np.ascontiguousarray(codes, dtype=np.int64)
    cdef Py_ssize_t n_rows = c.shape[0], n = c.shape[1]
    cdef Py_ssize_t a, b, i, x
    cdef double dn = <double>n, mi, denom, p

    hist_arr = np.zeros((bins, bins), dtype=np.int64)
    row_arr = np.zeros(bins, dtype=np.int64)
    col_arr = np.zeros(bins, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] hist = hist_arr
    cdef cnp.int64_t[::1] row = row_arr
    cdef cnp.int64_t[::1] col = col_arr

    ent_arr = np.zeros(n_rows, dtype=np.float64)
    cdef double[::1] ent = ent_arr
    for a in range(n_rows):
        for x in range(bins):
            row[x] = 0
        for i in range(n):
            row[c[a, i]] += 1
        mi = 0.0
        for x in range(bins):
            if row[x] > 0:
                p = row[x] / dn
                mi -= p * log(p)
        ent[a] = mi

    out = np.ones((n_rows, n_rows), dtype=np.float64)
    cdef double[:, ::1] nmi = out
    for a in range(n_rows):
        for b in range(a + 1, n_rows):
            for x in range(bins):
                for i in range(bins):
                    hist[x, i] = 0
            for i in range(n):
                hist[c[a, i], c[b, i]] += 1
            mi = _mi_from_hist(hist, row, col, bins, dn)
            denom = ent[a] + ent[b]
            if denom == 0.0:
                nmi[a, b] = 1.0
            else:
                nmi[a, b] = 2.0 * mi / denom
            nmi[b, a] = nmi[a, b]
    return out
