# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; mirror ``_kernels_py`` operation for operation."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"


def count_compositions(long l, long n):
    from math import comb
    if n == 0:
        return 1 if l == 0 else 0
    return comb(l + n - 1, n - 1)


def power_derivative(D, long n, long l):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] Dc = np.ascontiguousarray(D, dtype=np.float64)
    cdef Py_ssize_t npts = Dc.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] acc = np.zeros(npts)
    if n == 0:
        if l == 0:
            return np.ones(npts)
        return acc
    cdef double* fact = <double*> malloc((l + 1) * sizeof(double))
    cdef long* parts = <long*> malloc(n * sizeof(long))
    cdef double* accp = <double*> acc.data
    cdef double* base = <double*> Dc.data
    cdef long i, d, j, rest
    cdef Py_ssize_t p
    cdef double w, prod
    try:
        fact[0] = 1.0
        for i in range(1, l + 1):
            fact[i] = fact[i - 1] * i
        for d in range(n):
            parts[d] = 0
        parts[n - 1] = l
        while True:
            w = fact[l]
            for d in range(n):
                w = w / fact[parts[d]]
            for p in range(npts):
                prod = 1.0
                for d in range(n):
                    prod = prod * base[parts[d] * npts + p]
                accp[p] = accp[p] + w * prod
            j = n - 1
            while j > 0 and parts[j] == 0:
                j -= 1
            if j == 0:
                break
            rest = -1
            for d in range(j, n):
                rest += parts[d]
                parts[d] = 0
            parts[j - 1] += 1
            parts[n - 1] = rest
    finally:
        free(fact)
        free(parts)
    return acc


def series_sum(avals, g, ns, double abs_tol, long consecutive_small):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] A = np.ascontiguousarray(avals, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] G = np.ascontiguousarray(g, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] NS = np.ascontiguousarray(ns, dtype=np.int64)
    cdef Py_ssize_t K = A.shape[0]
    cdef Py_ssize_t N = A.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sums = np.zeros(N)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] used = np.zeros(N, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] small = np.zeros(N, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] done = np.zeros(N, dtype=bool)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.ones(N)
    cdef Py_ssize_t k, j
    cdef long m = 0, n, mm
    cdef double t
    # pass 1 per term: advance weights and reject non-finite active terms
    for k in range(K):
        n = NS[k]
        for j in range(N):
            mm = m
            while mm < n:
                w[j] = w[j] * (G[j] / (mm + 1.0))
                mm += 1
        m = n if n > m else m
        for j in range(N):
            if done[j]:
                continue
            t = A[k, j] * w[j]
            if not isfinite(t):
                return sums, used, done.astype(bool), k
        for j in range(N):
            if done[j]:
                continue
            t = A[k, j] * w[j]
            sums[j] = sums[j] + t
            used[j] += 1
            if consecutive_small > 0:
                if fabs(t) < abs_tol:
                    small[j] += 1
                else:
                    small[j] = 0
                if small[j] >= consecutive_small:
                    done[j] = 1
    return sums, used, done.astype(bool), -1
