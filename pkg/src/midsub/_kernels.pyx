# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled numerical kernels; see ``_kernels_py`` for the reference versions."""

import numpy as np

from libc.math cimport fabs, sqrt


cdef double _cabs(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def power_iteration(M, x0, double tol, Py_ssize_t max_iter, Py_ssize_t stall=2000):
    """Normalised power iteration with a Rayleigh-quotient estimate.

    Returns ``(lam, x, iterations, converged, residual)``.
    """
    cdef double complex[:, ::1] A = np.ascontiguousarray(M, dtype=complex)
    x_arr = np.array(x0, dtype=complex)
    cdef double complex[::1] x = x_arr
    cdef Py_ssize_t n = A.shape[0]
    y_arr = np.empty(n, dtype=complex)
    cdef double complex[::1] y = y_arr
    cdef Py_ssize_t i, k, it = 0, mark = 0
    cdef double complex s, num, den, lam = 0
    cdef double nrm = 0.0, ny, res = np.inf, best = np.inf, xmax, r
    for i in range(n):
        nrm = max(nrm, _cabs(x[i]))
    if nrm == 0.0:
        return 0j, x_arr, 0, False, np.inf
    for i in range(n):
        x[i] = x[i] / nrm
    for it in range(1, max_iter + 1):
        ny = 0.0
        num = 0
        den = 0
        xmax = 0.0
        with nogil:
            for i in range(n):
                s = 0
                for k in range(n):
                    s = s + A[i, k] * x[k]
                y[i] = s
                ny = max(ny, _cabs(s))
                num = num + x[i].conjugate() * s
                den = den + x[i].conjugate() * x[i]
                xmax = max(xmax, _cabs(x[i]))
        if ny == 0.0:
            return 0j, x_arr, it, True, 0.0
        lam = num / den
        res = 0.0
        for i in range(n):
            r = _cabs(y[i] - lam * x[i])
            if r > res:
                res = r
        res = res / xmax
        for i in range(n):
            x[i] = y[i] / ny
        if res <= tol * max(_cabs(lam), 1e-300):
            return complex(lam), x_arr, it, True, res
        if res < 0.5 * best:
            best = res
            mark = it
        elif it - mark > stall:
            break
    return complex(lam), x_arr, it, False, res


def reachable_positive_column(P, Py_ssize_t l_max):
    """Smallest ``l <= l_max`` such that the boolean power ``P**l`` has a full column."""
    cdef unsigned char[:, ::1] B = np.ascontiguousarray(np.asarray(P) != 0, dtype=np.uint8)
    cdef Py_ssize_t n = B.shape[0]
    q_arr = np.array(B, dtype=np.uint8)
    t_arr = np.empty_like(q_arr)
    cdef unsigned char[:, ::1] Q = q_arr
    cdef unsigned char[:, ::1] T = t_arr
    cdef Py_ssize_t l, i, j, k
    cdef bint full, hit
    for l in range(1, l_max + 1):
        for j in range(n):
            full = True
            for i in range(n):
                if not Q[i, j]:
                    full = False
                    break
            if full:
                return l
        with nogil:
            for i in range(n):
                for j in range(n):
                    T[i, j] = 0
                for k in range(n):
                    if Q[i, k]:
                        for j in range(n):
                            if B[k, j]:
                                T[i, j] = 1
        Q, T = T, Q
    return None
