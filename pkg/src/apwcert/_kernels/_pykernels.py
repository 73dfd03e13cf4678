"""Pure-Python/NumPy implementations of the hot kernels.

These are the reference fallback for ``_ckernels`` and follow the same
signatures and loop structure, so the two can be compared value for value.
"""
import math

import numpy as np

_BIG = 1e250
_TINY_X = 1e-8


def _miller_start(lmax, x):
    return lmax + int(x) + 40 + int(3.0 * math.sqrt(lmax + x + 1.0))


def numerov_outward(g, h, y1, y2):
    """Integrate y'' = g(r) y outward from seeds at grid points 1 and 2.

    ``g`` is sampled on the uniform grid r_i = i*h (index 0 is never read).
    Returns the solution array with y[0] = 0. The scheme advances
    z = (1 - h^2 g / 12) y through its first differences, so the energy enters
    only via the exactly formed products h^2 g y rather than through weights
    rounded next to 1. The running solution is rescaled whenever it exceeds
    1e250, so only its shape is meaningful.
    """
    g = np.asarray(g, dtype=np.float64)
    n = g.shape[0]
    y = np.zeros(n)
    y[1] = y1
    if n <= 2:
        return y
    y[2] = y2
    c = h * h / 12.0
    h2 = h * h
    z = (1.0 - c * g[2]) * y2
    dz = z - (1.0 - c * g[1]) * y1
    for i in range(2, n - 1):
        dz += h2 * g[i] * y[i]
        z += dz
        y[i + 1] = z / (1.0 - c * g[i + 1])
        if abs(y[i + 1]) > _BIG:
            y[: i + 2] /= _BIG
            z /= _BIG
            dz /= _BIG
    return y


def sph_jn_array(lmax, x):
    """Spherical Bessel functions j_0..j_lmax at a single non-negative x."""
    out = np.zeros(lmax + 1)
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
        f_next, f_cur = f_cur, f_prev
        if abs(f_cur) > _BIG:
            f_cur /= _BIG
            f_next /= _BIG
            out[l:] /= _BIG
    out[0] = f_cur
    j0 = math.sin(x) / x
    j1 = (j0 - math.cos(x)) / x
    f1 = out[1] if lmax >= 1 else f_next
    if abs(j0) >= abs(j1):
        scale = j0 / out[0]
    else:
        scale = j1 / f1
    out *= scale
    return out


def sph_in_scaled_array(lmax, x):
    """exp(-x) * i_l(x) for l = 0..lmax (modified spherical Bessel, first kind)."""
    out = np.zeros(lmax + 1)
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
            out[l] = xl / dfact * (1.0 + x * x / (2.0 * (2 * l + 3))) * math.exp(-x)
        return out
    nstart = _miller_start(lmax, x)
    f_next = 0.0
    f_cur = 1e-300
    for l in range(nstart, 0, -1):
        if l <= lmax:
            out[l] = f_cur
        f_prev = (2 * l + 1) / x * f_cur + f_next
        f_next, f_cur = f_cur, f_prev
        if abs(f_cur) > _BIG:
            f_cur /= _BIG
            f_next /= _BIG
            out[l:] /= _BIG
    out[0] = f_cur
    i0_scaled = -math.expm1(-2.0 * x) / (2.0 * x)
    out *= i0_scaled / out[0]
    return out


def legendre_table(lmax, cos_t, sin_t):
    """Orthonormal associated Legendre values with Condon-Shortley phase.

    Returns an array of shape (npts, (lmax+1)(lmax+2)/2) indexed by
    l(l+1)/2 + m for 0 <= m <= l, such that Y_lm = P[.., idx] * exp(i m phi).
    """
    cos_t = np.atleast_1d(np.asarray(cos_t, dtype=np.float64))
    sin_t = np.atleast_1d(np.asarray(sin_t, dtype=np.float64))
    npts = cos_t.shape[0]
    ntab = (lmax + 1) * (lmax + 2) // 2
    p = np.zeros((npts, ntab))
    pmm = np.full(npts, 0.5 / math.sqrt(math.pi))
    for m in range(lmax + 1):
        if m > 0:
            pmm = -math.sqrt((2 * m + 1) / (2.0 * m)) * sin_t * pmm
        p[:, m * (m + 1) // 2 + m] = pmm
        if m == lmax:
            break
        p_lm2 = pmm
        p_lm1 = math.sqrt(2 * m + 3) * cos_t * pmm
        p[:, (m + 1) * (m + 2) // 2 + m] = p_lm1
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p_l = a * (cos_t * p_lm1 - b * p_lm2)
            p[:, l * (l + 1) // 2 + m] = p_l
            p_lm2, p_lm1 = p_lm1, p_l
    return p
