"""Pure-Python (numpy) twins of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def closure_minplus(d, inf):
    d = np.array(d, dtype=np.int64)
    n = d.shape[0]
    for k in range(n):
        via = d[:, k, None] + d[None, k, :]
        np.minimum(via, inf, out=via)
        np.minimum(d, via, out=d)
    np.fill_diagonal(d, 0)
    return d


def closure_maxmin(d, top):
    d = np.array(d, dtype=np.int64)
    n = d.shape[0]
    for k in range(n):
        np.maximum(d, np.minimum(d[:, k, None], d[None, k, :]), out=d)
    np.fill_diagonal(d, top)
    return d


def matmul_minplus(a, b, inf):
    n = a.shape[0]
    out = np.full((n, n), inf, dtype=np.int64)
    for k in range(n):
        via = a[:, k, None] + b[None, k, :]
        np.minimum(out, via, out=out)
    np.minimum(out, inf, out=out)
    return out


def matmul_maxmin(a, b):
    n = a.shape[0]
    out = np.zeros((n, n), dtype=np.int64)
    for k in range(n):
        np.maximum(out, np.minimum(a[:, k, None], b[None, k, :]), out=out)
    return out
