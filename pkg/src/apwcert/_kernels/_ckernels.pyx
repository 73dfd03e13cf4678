# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs, expm1, exp, M_PI

cnp.import_array()

cdef double _BIG = 1e250
cdef double _TINY_X = 1e-8


cdef inline int _miller_start(int lmax, double x):
    return lmax + <int>x + 40 + <int>(3.0 * sqrt(lmax + x + 1.0))


def numerov_outward(g_in, double h, double y1, double y2):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.ascontiguousarray(g_in, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.zeros(n)
    cdef double c = h * h / 12.0
    cdef double h2 = h * h
    cdef double z, dz
    cdef Py_ssize_t i, j
    y[1] = y1
    if n <= 2:
        return y
    y[2] = y2
    z = (1.0 - c * g[2]) * y2
    dz = z - (1.0 - c * g[1]) * y1
    for i in range(2, n - 1):
        dz += h2 * g[i] * y[i]
        z += dz
        y[i + 1] = z / (1.0 - c * g[i + 1])
        if fabs(y[i + 1]) > _BIG:
            for j in range(i + 2):
                y[j] /= _BIG
            z /= _BIG
            dz /= _BIG
    return y


def sph_jn_array(int lmax, double x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(lmax + 1)
    cdef double dfact, xl, f_next, f_cur, f_prev, j0, j1, f1, scale
    cdef int l, k, nstart
    if x == 0.0:
        out[0] = 1.0
        return out
    if x < _TINY_X:
        dfact = 1.0
        xl = 1.0
        for l in range(lmax + 1):
            if l > 0:
                dfact *= 2 * l + 1
                xl *= x
            out[l] = xl / dfact * (1.0 - x * x / (2.0 * (2 * l + 3)))
        return out
    nstart = _miller_start(lmax, x)
    f_next = 0.0
    f_cur = 1e-300
    for l in range(nstart, 0, -1):
        if l <= lmax:
            out[l] = f_cur
        f_prev = (2 * l + 1) / x * f_cur - f_next
        f_next = f_cur
        f_cur = f_prev
        if fabs(f_cur) > _BIG:
            f_cur /= _BIG
            f_next /= _BIG
            for k in range(l, lmax + 1):
                out[k] /= _BIG
    out[0] = f_cur
    j0 = sin(x) / x
    j1 = (j0 - cos(x)) / x
    f1 = out[1] if lmax >= 1 else f_next
    if fabs(j0) >= fabs(j1):
        scale = j0 / out[0]
    else:
        scale = j1 / f1
    for l in range(lmax + 1):
        out[l] *= scale
    return out


def sph_in_scaled_array(int lmax, double x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(lmax + 1)
    cdef double dfact, xl, f_next, f_cur, f_prev, scale
    cdef int l, k, nstart
    if x == 0.0:
        out[0] = 1.0
        return out
    if x < _TINY_X:
        dfact = 1.0
        xl = 1.0
        for l in range(lmax + 1):
            if l > 0:
                dfact *= 2 * l + 1
                xl *= x
            out[l] = xl / dfact * (1.0 + x * x / (2.0 * (2 * l + 3))) * exp(-x)
        return out
    nstart = _miller_start(lmax, x)
    f_next = 0.0
    f_cur = 1e-300
    for l in range(nstart, 0, -1):
        if l <= lmax:
            out[l] = f_cur
        f_prev = (2 * l + 1) / x * f_cur + f_next
        f_next = f_cur
        f_cur = f_prev
        if fabs(f_cur) > _BIG:
            f_cur /= _BIG
            f_next /= _BIG
            for k in range(l, lmax + 1):
                out[k] /= _BIG
    out[0] = f_cur
    scale = (-expm1(-2.0 * x) / (2.0 * x)) / out[0]
    for l in range(lmax + 1):
        out[l] *= scale
    return out


def legendre_table(int lmax, cos_in, sin_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ct = np.ascontiguousarray(np.atleast_1d(cos_in), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] st = np.ascontiguousarray(np.atleast_1d(sin_in), dtype=np.float64)
    cdef Py_ssize_t npts = ct.shape[0]
    cdef Py_ssize_t ntab = (lmax + 1) * (lmax + 2) // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.zeros((npts, ntab))
    cdef Py_ssize_t q
    cdef int l, m
    cdef double pmm, p_lm1, p_lm2, p_l, a, b, c0 = 0.5 / sqrt(M_PI)
    for q in range(npts):
        pmm = c0
        for m in range(lmax + 1):
            if m > 0:
                pmm = -sqrt((2 * m + 1) / (2.0 * m)) * st[q] * pmm
            p[q, m * (m + 1) // 2 + m] = pmm
            if m == lmax:
                break
            p_lm2 = pmm
            p_lm1 = sqrt(2 * m + 3.0) * ct[q] * pmm
            p[q, (m + 1) * (m + 2) // 2 + m] = p_lm1
            for l in range(m + 2, lmax + 1):
                a = sqrt((4.0 * l * l - 1.0) / (<double>l * l - <double>m * m))
                b = sqrt(((l - 1.0) * (l - 1.0) - <double>m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0))
                p_l = a * (ct[q] * p_lm1 - b * p_lm2)
                p[q, l * (l + 1) // 2 + m] = p_l
                p_lm2 = p_lm1
                p_lm1 = p_l
    return p
