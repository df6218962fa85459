# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled force-noise kernel: per-frequency 4x4 complex solves.

Mirrors ``_engine_py.psd_points`` exactly; selected at import time by
``magcool.spectra`` when available.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef int _solve4(double complex[4][4] m, double complex[4] rhs, double complex[4] out) noexcept nogil:
    """Gaussian elimination with partial pivoting; returns 0 on success."""
    cdef double complex aug[4][5]
    cdef double complex factor, pivot
    cdef double best, mag
    cdef int i, j, k, piv
    for i in range(4):
        for j in range(4):
            aug[i][j] = m[i][j]
        aug[i][4] = rhs[i]
    for k in range(4):
        piv = k
        best = aug[k][k].real * aug[k][k].real + aug[k][k].imag * aug[k][k].imag
        for i in range(k + 1, 4):
            mag = aug[i][k].real * aug[i][k].real + aug[i][k].imag * aug[i][k].imag
            if mag > best:
                best = mag
                piv = i
        if best < 1e-300:
            return 1
        if piv != k:
            for j in range(k, 5):
                factor = aug[k][j]
                aug[k][j] = aug[piv][j]
                aug[piv][j] = factor
        pivot = aug[k][k]
        for i in range(k + 1, 4):
            factor = aug[i][k] / pivot
            for j in range(k, 5):
                aug[i][j] = aug[i][j] - factor * aug[k][j]
    for k in range(3, -1, -1):
        factor = aug[k][4]
        for j in range(k + 1, 4):
            factor = factor - aug[k][j] * out[j]
        out[k] = factor / aug[k][k]
    return 0


cdef int _response(double omega, double complex[4][4] at, double complex[4] f,
                   double ga, double gm, double complex[4] t) noexcept nogil:
    """t(omega) = f (-i w I - A)^{-1} N via the transposed system."""
    cdef double complex mt[4][4]
    cdef double complex y[4]
    cdef int i, j, err
    for i in range(4):
        for j in range(4):
            mt[i][j] = -at[i][j]
        mt[i][i] = mt[i][i] - 1j * omega
    err = _solve4(mt, f, y)
    if err:
        return err
    t[0] = y[0] * ga
    t[1] = y[1] * ga
    t[2] = y[2] * gm
    t[3] = y[3] * gm
    return 0


def psd_points(omega,
               double delta_a, double delta_m, double gamma_a, double gamma_m,
               double j_ac, double j_mc, double j_am, double complex eps_a,
               double cav_nn, double cav_anti, double complex cav_anom,
               double mag_nn, double mag_anti):
    """Force PSD on a frequency array; same contract as the numpy engine."""
    cdef cnp.ndarray[double, ndim=1] w = np.ascontiguousarray(
        np.atleast_1d(np.asarray(omega, dtype=np.float64)))
    cdef Py_ssize_t n = w.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] wv = w
    cdef double[::1] ov = out

    cdef double complex at[4][4]
    cdef double complex f[4]
    cdef double complex tp[4]
    cdef double complex tm[4]
    cdef double complex s, canom_c
    cdef double sga, sgm
    cdef Py_ssize_t i
    cdef int j, k, err

    # transposed drift A^T, built once
    for j in range(4):
        for k in range(4):
            at[j][k] = 0
    at[0][0] = -(gamma_a / 2.0 + 1j * delta_a)
    at[1][0] = -2j * eps_a
    at[2][0] = -1j * j_am
    at[0][1] = 2j * eps_a.conjugate()
    at[1][1] = -(gamma_a / 2.0 - 1j * delta_a)
    at[3][1] = 1j * j_am
    at[0][2] = -1j * j_am
    at[2][2] = -(gamma_m / 2.0 + 1j * delta_m)
    at[1][3] = 1j * j_am
    at[3][3] = -(gamma_m / 2.0 - 1j * delta_m)

    f[0] = -j_ac
    f[1] = -j_ac
    f[2] = -j_mc
    f[3] = -j_mc
    sga = gamma_a ** 0.5
    sgm = gamma_m ** 0.5
    canom_c = cav_anom.conjugate()

    err = 0
    with nogil:
        for i in range(n):
            err = _response(wv[i], at, f, sga, sgm, tp)
            if err:
                break
            err = _response(-wv[i], at, f, sga, sgm, tm)
            if err:
                break
            s = (cav_nn * tp[0] * tm[1]
                 + cav_anti * tp[1] * tm[0]
                 + cav_anom * tp[0] * tm[0]
                 + canom_c * tp[1] * tm[1]
                 + mag_nn * tp[2] * tm[3]
                 + mag_anti * tp[3] * tm[2])
            ov[i] = s.real
    if err:
        raise ArithmeticError("singular response matrix in compiled kernel")
    return out
