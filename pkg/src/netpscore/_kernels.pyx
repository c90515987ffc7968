# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid-density accumulation.

For every unit ``i`` and every grid point ``g`` the Gaussian density of each
category mean is evaluated in whitened coordinates and the per-unit sums
``S[c, i] = sum_g f_c`` and cross products ``Q[a, b, i] = sum_g f_a f_b``
are accumulated without materializing the unit-by-grid matrix.
"""
import numpy as np

cimport cython
from cython.parallel cimport parallel, prange
from libc.math cimport exp
from libc.stdlib cimport free, malloc


def density_gram_white(const double[:, ::1] grid_w, const double[:, :, ::1] means_w,
                       double log_norm, int threads=1):
    cdef Py_ssize_t G = grid_w.shape[0]
    cdef Py_ssize_t K = grid_w.shape[1]
    cdef Py_ssize_t C = means_w.shape[0]
    cdef Py_ssize_t N = means_w.shape[1]
    if means_w.shape[2] != K:
        raise ValueError("grid and means have different dimension")
    sums_arr = np.zeros((C, N))
    gram_arr = np.zeros((C, C, N))
    cdef double[:, ::1] sums = sums_arr
    cdef double[:, :, ::1] gram = gram_arr
    cdef Py_ssize_t i, g, c, a, b, k
    cdef double q, d
    cdef double *lam
    cdef double *acc
    if threads < 1:
        threads = 1
    with nogil, parallel(num_threads=threads):
        lam = <double *> malloc(C * sizeof(double))
        acc = <double *> malloc((C + C * C) * sizeof(double))
        for i in prange(N, schedule="static"):
            for c in range(C + C * C):
                acc[c] = 0.0
            for g in range(G):
                for c in range(C):
                    q = 0.0
                    for k in range(K):
                        d = grid_w[g, k] - means_w[c, i, k]
                        q = q + d * d
                    lam[c] = exp(log_norm - 0.5 * q)
                    acc[c] = acc[c] + lam[c]
                for a in range(C):
                    for b in range(a, C):
                        acc[C + a * C + b] = acc[C + a * C + b] + lam[a] * lam[b]
            for a in range(C):
                sums[a, i] = acc[a]
                for b in range(a, C):
                    gram[a, b, i] = acc[C + a * C + b]
                    gram[b, a, i] = acc[C + a * C + b]
        free(lam)
        free(acc)
    return sums_arr, gram_arr
