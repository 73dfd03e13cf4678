"""Spherical Bessel functions, spherical harmonics and quadrature on the sphere.

Conventions
-----------
Spherical harmonics are orthonormal on the unit sphere and carry the
Condon-Shortley phase, so Y_{l,-m} = (-1)^m conj(Y_lm). Coefficient vectors
over (l, m) use the flat index ``l*l + l + m``.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import _kernels

FOUR_PI = 4.0 * math.pi


def lm_index(l, m):
    return l * l + l + m


def n_lm(lmax):
    """Number of (l, m) pairs with l <= lmax."""
    return (lmax + 1) ** 2


def lm_arrays(lmax):
    """Arrays ``(ls, ms)`` listing every (l, m) in flat-index order."""
    ls = np.repeat(np.arange(lmax + 1), 2 * np.arange(lmax + 1) + 1)
    ms = np.concatenate([np.arange(-l, l + 1) for l in range(lmax + 1)])
    return ls, ms


def spherical_bessel_j_all(lmax, x):
    """j_0 .. j_lmax at x (scalar or array); output shape ``x.shape + (lmax+1,)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        return _kernels.sph_jn_array(int(lmax), float(x))
    flat = x.ravel()
    out = np.empty((flat.size, lmax + 1))
    for i, xi in enumerate(flat):
        out[i] = _kernels.sph_jn_array(int(lmax), float(xi))
    return out.reshape(x.shape + (lmax + 1,))


def spherical_bessel_j(l, x):
    """Spherical Bessel function of the first kind j_l(x), x >= 0."""
    if l < 0:
        raise ValueError("l must be non-negative")
    return float(_kernels.sph_jn_array(int(l), float(x))[l])


def spherical_bessel_j_deriv_all(lmax, x):
    """Derivatives j_l'(x) for l = 0..lmax via (2l+1) j_l' = l j_{l-1} - (l+1) j_{l+1}."""
    j = spherical_bessel_j_all(lmax + 1, x)
    out = np.empty(j.shape[:-1] + (lmax + 1,))
    out[..., 0] = -j[..., 1]
    ls = np.arange(1, lmax + 1)
    out[..., 1:] = (ls * j[..., :-2] - (ls + 1) * j[..., 2:]) / (2 * ls + 1)
    return out


def modified_spherical_bessel_i_scaled_all(lmax, x):
    """exp(-x) i_l(x) for l = 0..lmax."""
    return _kernels.sph_in_scaled_array(int(lmax), float(x))


def modified_spherical_bessel_i_scaled(l, x):
    """Overflow-safe i_l(x) as ``(mantissa, log_scale)`` with i_l = mantissa * exp(log_scale).

    For x <= 30 the scale is 0 and the mantissa is the plain value.
    """
    scaled = float(_kernels.sph_in_scaled_array(int(l), float(x))[l])
    if x > 30.0:
        return scaled, float(x)
    return scaled * math.exp(x), 0.0


def modified_spherical_bessel_i(l, x):
    """Modified spherical Bessel function of the first kind i_l(x)."""
    value, log_scale = modified_spherical_bessel_i_scaled(l, x)
    return value * math.exp(log_scale) if log_scale else value


def _legendre_to_ylm(p, lmax, phi):
    npts = p.shape[0]
    out = np.empty((npts, n_lm(lmax)), dtype=np.complex128)
    phases = np.exp(1j * np.outer(phi, np.arange(lmax + 1)))
    for l in range(lmax + 1):
        base = l * (l + 1) // 2
        for m in range(l + 1):
            y = p[:, base + m] * phases[:, m]
            out[:, l * l + l + m] = y
            if m:
                out[:, l * l + l - m] = (-1) ** m * np.conj(y)
    return out


def spherical_harmonics_all(lmax, theta, phi):
    """All Y_lm(theta, phi) for l <= lmax; shape (npts, (lmax+1)**2)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    p = _kernels.legendre_table(int(lmax), np.cos(theta), np.sin(theta))
    return _legendre_to_ylm(p, lmax, phi)


def spherical_harmonics_at(lmax, unit_vectors):
    """Y_lm evaluated at unit vectors of shape (npts, 3)."""
    u = np.atleast_2d(np.asarray(unit_vectors, dtype=np.float64))
    cos_t = np.clip(u[:, 2], -1.0, 1.0)
    sin_t = np.hypot(u[:, 0], u[:, 1])
    phi = np.arctan2(u[:, 1], u[:, 0])
    p = _kernels.legendre_table(int(lmax), cos_t, sin_t)
    return _legendre_to_ylm(p, lmax, phi)


def spherical_harmonic(l, m, theta, phi):
    """Orthonormal complex spherical harmonic Y_lm(theta, phi)."""
    if abs(m) > l:
        raise ValueError("|m| must not exceed l")
    return complex(spherical_harmonics_all(l, theta, phi)[0, lm_index(l, m)])


def cartesian_to_spherical(vectors):
    """Return (r, theta, phi) for an array of 3-vectors; theta = 0 at the origin."""
    v = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    r = np.linalg.norm(v, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_t = np.where(r > 0, v[:, 2] / np.where(r > 0, r, 1.0), 1.0)
    theta = np.arccos(np.clip(cos_t, -1.0, 1.0))
    phi = np.arctan2(v[:, 1], v[:, 0])
    return r, theta, phi


@dataclass(frozen=True)
class SphereQuadrature:
    """Product rule on the unit sphere: Gauss-Legendre in cos(theta), uniform in phi."""

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def nodes(self):
        return np.column_stack([self.theta, self.phi])

    def unit_vectors(self):
        st = np.sin(self.theta)
        return np.column_stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    def points(self, radius=1.0, center=(0.0, 0.0, 0.0)):
        return np.asarray(center, dtype=np.float64) + radius * self.unit_vectors()

    def integrate(self, values, radius=1.0):
        """Surface integral over the sphere of the given radius."""
        return radius * radius * np.tensordot(self.weights, values, axes=(0, 0))

    def ylm(self, lmax):
        return spherical_harmonics_all(lmax, self.theta, self.phi)

    def project(self, values, lmax):
        """Coefficients g_lm of sampled values in the Y_lm basis (unit-sphere inner product)."""
        y = self.ylm(lmax)
        return np.conj(y).T @ (self.weights * np.asarray(values))


def build_sphere_quadrature(order):
    """Quadrature exact for products Y_lm conj(Y_l'm') with l, l' <= order."""
    if order < 0 or order > 100:
        raise ValueError("order must lie in [0, 100]")
    n_theta = order + 1
    n_phi = 2 * order + 1
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.outer(w, np.full(n_phi, 2.0 * math.pi / n_phi))
    return SphereQuadrature(tt.ravel(), pp.ravel(), ww.ravel(), order)
