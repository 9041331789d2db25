# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled O(n^2) pair scans over a periodic sample vector."""
import numpy as np
cimport numpy as cnp


def max_gap_scan(const double[::1] theta, const double[::1] omega_lag):
    """Max over ordered pairs of ``theta[i] - theta[j] - omega_lag[(j - i) mod n]``."""
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t i, l, j
    cdef double best = -1e308, g, ti
    cdef Py_ssize_t bi = 0, bj = 1
    for i in range(n):
        ti = theta[i]
        for l in range(1, n):
            j = i + l
            if j >= n:
                j -= n
            g = ti - theta[j] - omega_lag[l]
            if g > best:
                best = g
                bi = i
                bj = j
    return best, bi, bj


def max_ratio_scan(const double[::1] theta, const double[::1] denom_lag):
    """Max over pairs of ``|theta[i] - theta[j]| / denom_lag[(j - i) mod n]``."""
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t i, l, j
    cdef double best = 0.0, r, d
    cdef Py_ssize_t bi = 0, bj = 1
    for i in range(n):
        for l in range(1, n // 2 + 1):
            j = i + l
            if j >= n:
                j -= n
            d = theta[i] - theta[j]
            if d < 0:
                d = -d
            r = d / denom_lag[l]
            if r > best:
                best = r
                bi = i
                bj = j
    return best, bi, bj
