# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-iteration hot kernels.

Same contracts as `_kernels_py`; inputs are C-contiguous float64 arrays with a
zero strict upper triangle, validated by the callers. Triangular loops touch
only the stored lower entries.
"""
import numpy as np

from libc.math cimport log, sqrt


def tri_matvec(double[:, ::1] L, double[::1] v):
    cdef Py_ssize_t n = L.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(i + 1):
            acc += L[i, j] * v[j]
        o[i] = acc
    return out


def tri_tmatvec(double[:, ::1] L, double[::1] v):
    cdef Py_ssize_t n = L.shape[0]
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(i + 1):
            o[j] += L[i, j] * v[i]
    return out


def forward_solve(double[:, ::1] L, double[::1] b):
    cdef Py_ssize_t n = L.shape[0]
    out = np.empty(n)
    cdef double[::1] z = out
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = b[i]
        for j in range(i):
            acc -= L[i, j] * z[j]
        z[i] = acc / L[i, i]
    return out


def outer_lower(double[::1] a, double[::1] b):
    cdef Py_ssize_t n = a.shape[0]
    out = np.zeros((n, n))
    cdef double[:, ::1] m = out
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(i + 1):
            m[i, j] = a[i] * b[j]
    return out


def log_det_tri(double[:, ::1] L):
    cdef Py_ssize_t n = L.shape[0]
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        acc += log(L[i, i])
    return acc


def axpy_outer_lower(double[:, ::1] M, double c, double[::1] a, double[::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(i + 1):
            M[i, j] += c * a[i] * b[j]


def add_beta_invdiag(double[:, ::1] M, double beta, double[:, ::1] L):
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t i
    for i in range(n):
        M[i, i] += beta / L[i, i]


def rmsprop_update(double[:, ::1] L, double[:, ::1] G, double[:, ::1] grad,
                   double eta, double floor):
    cdef Py_ssize_t n = L.shape[0]
    cdef Py_ssize_t i, j
    cdef double g
    for i in range(n):
        for j in range(i + 1):
            g = grad[i, j]
            G[i, j] = 0.9 * G[i, j] + 0.1 * g * g
            L[i, j] += (eta / (1.0 + sqrt(G[i, j]))) * g
        if L[i, i] < floor:
            L[i, i] = floor


def am_scale_direction(double[:, ::1] L, double[::1] z):
    cdef Py_ssize_t n = L.shape[0]
    out = np.zeros((n, n))
    cdef double[:, ::1] d = out
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(i, -1, -1):
            acc += L[i, k] * z[k]
            d[i, k] = z[k] * acc - L[i, k]
    return out


def am_update_scale(double[:, ::1] L, double[::1] z, double rho, double floor):
    cdef Py_ssize_t n = L.shape[0]
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(i, -1, -1):
            acc += L[i, k] * z[k]
            L[i, k] += rho * (z[k] * acc - L[i, k])
        if L[i, i] < floor:
            L[i, i] = floor


cdef double _lagged_dot(double[::1] y, Py_ssize_t n, Py_ssize_t k):
    # four accumulators so the reduction vectorises without -ffast-math
    cdef double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0
    cdef Py_ssize_t m = n - k
    cdef Py_ssize_t t = 0
    while t + 4 <= m:
        a0 += y[t] * y[t + k]
        a1 += y[t + 1] * y[t + 1 + k]
        a2 += y[t + 2] * y[t + 2 + k]
        a3 += y[t + 3] * y[t + 3 + k]
        t += 4
    while t < m:
        a0 += y[t] * y[t + k]
        t += 1
    return (a0 + a1) + (a2 + a3)


def geyer_tau(double[::1] y):
    cdef Py_ssize_t n = y.shape[0]
    cdef double c0 = _lagged_dot(y, n, 0) / n
    cdef double pair_sum = 0.0
    cdef double r_even, r_odd
    cdef Py_ssize_t m = 0
    while 2 * m + 1 < n:
        if m == 0:
            r_even = 1.0
        else:
            r_even = _lagged_dot(y, n, 2 * m) / (n * c0)
        r_odd = _lagged_dot(y, n, 2 * m + 1) / (n * c0)
        if r_even + r_odd <= 0.0:
            break
        pair_sum += r_even + r_odd
        m += 1
    return 2.0 * pair_sum - 1.0
