# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled closure and product kernels over integer-encoded semirings.

``minplus`` matrices hold non-negative costs with ``inf`` as the sentinel for
the bottom element; ``maxmin`` matrices hold order ranks with 0 as bottom.
"""

import numpy as np

ctypedef long long i64


def closure_minplus(i64[:, ::1] d, i64 inf):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, j, k
    cdef i64 dik, s
    for k in range(n):
        for i in range(n):
            dik = d[i, k]
            if dik >= inf:
                continue
            for j in range(n):
                if d[k, j] >= inf:
                    continue
                s = dik + d[k, j]
                if s < d[i, j]:
                    d[i, j] = s
    for i in range(n):
        d[i, i] = 0
    return np.asarray(d)


def closure_maxmin(i64[:, ::1] d, i64 top):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, j, k
    cdef i64 dik, m
    for k in range(n):
        for i in range(n):
            dik = d[i, k]
            if dik == 0:
                continue
            for j in range(n):
                m = d[k, j]
                if dik < m:
                    m = dik
                if m > d[i, j]:
                    d[i, j] = m
    for i in range(n):
        d[i, i] = top
    return np.asarray(d)


def matmul_minplus(i64[:, ::1] a, i64[:, ::1] b, i64 inf):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k
    cdef i64 aik, s
    out_arr = np.full((n, n), inf, dtype=np.int64)
    cdef i64[:, ::1] out = out_arr
    for i in range(n):
        for k in range(n):
            aik = a[i, k]
            if aik >= inf:
                continue
            for j in range(n):
                if b[k, j] >= inf:
                    continue
                s = aik + b[k, j]
                if s < out[i, j]:
                    out[i, j] = s
    return out_arr


def matmul_maxmin(i64[:, ::1] a, i64[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k
    cdef i64 aik, m
    out_arr = np.zeros((n, n), dtype=np.int64)
    cdef i64[:, ::1] out = out_arr
    for i in range(n):
        for k in range(n):
            aik = a[i, k]
            if aik == 0:
                continue
            for j in range(n):
                m = b[k, j]
                if aik < m:
                    m = aik
                if m > out[i, j]:
                    out[i, j] = m
    return out_arr
