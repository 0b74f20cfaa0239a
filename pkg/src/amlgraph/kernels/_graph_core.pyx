#cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled accumulation kernels.

Bitwise-equivalent to kernels._numpy_backend: same loop orders, same
separate multiply/add (the extension is built with -ffp-contract=off so
the compiler cannot fuse them). The canonical edge orderings are computed
by kernels._order and passed in; this module only runs the hot loops.
"""

import numpy as np

cimport numpy as cnp

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64


def matmul(double[:, ::1] a, double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], k = a.shape[1], m = b.shape[1]
    cdef Py_ssize_t i, p, j
    cdef double aip
    out_arr = np.zeros((n, m))
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        for p in range(k):
            aip = a[i, p]
            for j in range(m):
                out[i, j] += aip * b[p, j]
    return out_arr


def gather_rows(double[:, ::1] mat, i64[::1] idx):
    cdef Py_ssize_t e = idx.shape[0], d = mat.shape[1]
    cdef Py_ssize_t i, j
    cdef i64 r
    out_arr = np.empty((e, d))
    cdef double[:, ::1] out = out_arr
    for i in range(e):
        r = idx[i]
        for j in range(d):
            out[i, j] = mat[r, j]
    return out_arr


def scatter_add_rows(double[:, ::1] rows, i64[::1] idx, Py_ssize_t n):
    cdef Py_ssize_t e = idx.shape[0], d = rows.shape[1]
    cdef Py_ssize_t i, j
    cdef i64 r
    out_arr = np.zeros((n, d))
    cdef double[:, ::1] out = out_arr
    for i in range(e):
        r = idx[i]
        for j in range(d):
            out[r, j] += rows[i, j]
    return out_arr


def segment_max(i64[::1] offsets, double[::1] v):
    cdef Py_ssize_t n = offsets.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double m
    out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        if offsets[i] < offsets[i + 1]:
            m = v[offsets[i]]
            for p in range(offsets[i] + 1, offsets[i + 1]):
                if v[p] > m:
                    m = v[p]
            out[i] = m
    return out_arr


def segment_sum_ordered(i64[::1] offsets, double[::1] v, order):
    cdef Py_ssize_t n = offsets.shape[0] - 1
    cdef Py_ssize_t i, p
    cdef double acc
    cdef i64[::1] ordv
    cdef bint has_order = order is not None
    if has_order:
        ordv = order
    out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        acc = 0.0
        for p in range(offsets[i], offsets[i + 1]):
            acc += v[ordv[p]] if has_order else v[p]
        out[i] = acc
    return out_arr


def propagate_ordered(i64[::1] offsets, i64[::1] src, double[::1] w,
                      double[:, ::1] h, order):
    cdef Py_ssize_t n = offsets.shape[0] - 1, d = h.shape[1]
    cdef Py_ssize_t i, p, j
    cdef i64 e, s
    cdef double we
    cdef i64[::1] ordv
    cdef bint has_order = order is not None
    if has_order:
        ordv = order
    out_arr = np.zeros((n, d))
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        for p in range(offsets[i], offsets[i + 1]):
            e = ordv[p] if has_order else p
            we = w[e]
            s = src[e]
            for j in range(d):
                out[i, j] += we * h[s, j]
    return out_arr


def propagate_transpose(i64[::1] offsets, i64[::1] src, double[::1] w,
                        double[:, ::1] g, Py_ssize_t n_src):
    cdef Py_ssize_t n = offsets.shape[0] - 1, d = g.shape[1]
    cdef Py_ssize_t i, p, j
    cdef i64 s
    cdef double we
    out_arr = np.zeros((n_src, d))
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        for p in range(offsets[i], offsets[i + 1]):
            we = w[p]
            s = src[p]
            for j in range(d):
                out[s, j] += we * g[i, j]
    return out_arr


def edge_combine(i64[::1] offsets, i64[::1] src, double[:, ::1] a,
                 double[:, ::1] b):
    cdef Py_ssize_t n = offsets.shape[0] - 1, d = a.shape[1]
    cdef Py_ssize_t i, p, j
    cdef i64 s
    cdef double acc
    out_arr = np.zeros(src.shape[0])
    cdef double[::1] out = out_arr
    for i in range(n):
        for p in range(offsets[i], offsets[i + 1]):
            s = src[p]
            acc = 0.0
            for j in range(d):
                acc += a[i, j] * b[s, j]
            out[p] = acc
    return out_arr
