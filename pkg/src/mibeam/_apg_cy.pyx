# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of the pure-numpy APG loop in _apg.py.

Same algorithm, same termination rule; the matvec goes through BLAS zhemv and
everything else is straight C loops, which removes the per-iteration Python
overhead that dominates the numpy version at the small-to-medium problem
sizes this solver runs on.
"""

import numpy as np

from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zhemv

ctypedef double complex zcplx


cdef void _hemv(zcplx[::1, :] m, zcplx[::1] x, zcplx[::1] out) noexcept:
    cdef int n = m.shape[0]
    cdef int inc = 1
    cdef zcplx one = 1.0
    cdef zcplx zero = 0.0
    cdef char uplo = b'L'
    zhemv(&uplo, &n, &one, &m[0, 0], &n, &x[0], &inc, &zero, &out[0], &inc)


cdef void _project(zcplx[::1] x, Py_ssize_t[::1] starts, double[::1] radii) noexcept:
    cdef Py_ssize_t i, j
    cdef double nrm2, scale
    for i in range(radii.shape[0]):
        nrm2 = 0.0
        for j in range(starts[i], starts[i + 1]):
            nrm2 += x[j].real * x[j].real + x[j].imag * x[j].imag
        if nrm2 > radii[i] * radii[i]:
            scale = radii[i] / sqrt(nrm2)
            for j in range(starts[i], starts[i + 1]):
                x[j] = x[j] * scale


cdef double _phi(zcplx[::1] x, zcplx[::1] mx, zcplx[::1] b) noexcept:
    cdef Py_ssize_t j
    cdef double acc = 0.0
    for j in range(x.shape[0]):
        acc += (x[j].conjugate() * mx[j]).real - 2.0 * (b[j].conjugate() * x[j]).real
    return acc


cdef double _dist(zcplx[::1] a, zcplx[::1] c) noexcept:
    cdef Py_ssize_t j
    cdef double acc = 0.0
    cdef zcplx d
    for j in range(a.shape[0]):
        d = a[j] - c[j]
        acc += d.real * d.real + d.imag * d.imag
    return sqrt(acc)


DEF RESTART_SLACK = 1e-14  # see _apg.RESTART_SLACK


def apg_ball_qp(zcplx[::1, :] M, zcplx[::1] b, Py_ssize_t[::1] starts,
                double[::1] radii, zcplx[::1] x0, double maxeig, double tol,
                int max_iter):
    cdef Py_ssize_t n = b.shape[0]
    cdef double inv_me = 1.0 / maxeig

    x_arr = np.array(x0, dtype=complex)
    y_arr = np.empty(n, dtype=complex)
    z_arr = np.empty(n, dtype=complex)
    step_arr = np.empty(n, dtype=complex)
    xb_arr = np.empty(n, dtype=complex)
    mx_arr = np.empty(n, dtype=complex)
    my_arr = np.empty(n, dtype=complex)
    mz_arr = np.empty(n, dtype=complex)
    mxb_arr = np.empty(n, dtype=complex)
    cdef zcplx[::1] x = x_arr
    cdef zcplx[::1] y = y_arr
    cdef zcplx[::1] z = z_arr
    cdef zcplx[::1] step = step_arr
    cdef zcplx[::1] x_best = xb_arr
    cdef zcplx[::1] mx = mx_arr
    cdef zcplx[::1] my = my_arr
    cdef zcplx[::1] mz = mz_arr
    cdef zcplx[::1] mx_best = mxb_arr

    cdef Py_ssize_t j
    cdef int iters = 0
    cdef double fx, fz, f_best, gm, slack
    cdef double theta = 1.0, theta_new, beta

    _project(x, starts, radii)
    _hemv(M, x, mx)
    fx = _phi(x, mx, b)
    f_best = fx
    for j in range(n):
        y[j] = x[j]
        my[j] = mx[j]
        x_best[j] = x[j]
        mx_best[j] = mx[j]

    while iters < max_iter:
        iters += 1
        for j in range(n):
            z[j] = y[j] - (my[j] - b[j]) * inv_me
        _project(z, starts, radii)
        _hemv(M, z, mz)
        fz = _phi(z, mz, b)
        # stationarity at z itself: one more projected step, no matvec
        for j in range(n):
            step[j] = z[j] - (mz[j] - b[j]) * inv_me
        _project(step, starts, radii)
        gm = 2.0 * maxeig * _dist(z, step)
        slack = RESTART_SLACK * (1.0 + (f_best if f_best >= 0 else -f_best))
        if fz < f_best:
            f_best = fz
            for j in range(n):
                x_best[j] = z[j]
                mx_best[j] = mz[j]
        if gm <= tol and fz <= f_best + slack:
            for j in range(n):
                x[j] = z[j]
            return x_arr, iters, gm, True
        if fz > fx + RESTART_SLACK * (1.0 + (fx if fx >= 0 else -fx)):
            theta = 1.0
            for j in range(n):
                y[j] = x[j]
                my[j] = mx[j]
            continue
        theta_new = 0.5 * (1.0 + sqrt(1.0 + 4.0 * theta * theta))
        beta = (theta - 1.0) / theta_new
        for j in range(n):
            y[j] = z[j] + beta * (z[j] - x[j])
            my[j] = mz[j] + beta * (mz[j] - mx[j])
            x[j] = z[j]
            mx[j] = mz[j]
        fx = fz
        theta = theta_new

    for j in range(n):
        step[j] = x_best[j] - (mx_best[j] - b[j]) * inv_me
    _project(step, starts, radii)
    gm = 2.0 * maxeig * _dist(x_best, step)
    for j in range(n):
        x[j] = x_best[j]
    return x_arr, iters, gm, bool(gm <= tol)
