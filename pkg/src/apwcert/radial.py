"""Radial Schroedinger equation inside muffin-tin spheres and the square-well bound state.

Energies are in units where the kinetic operator is the bare -Laplacian.
The reduced radial function chi_l(r) = r R_l(r) solves

    -chi'' + [l(l+1)/r^2 + V(r)] chi = E chi,   chi(0) = 0.
"""
from dataclasses import dataclass, field
from functools import cached_property
import logging
import math

import numpy as np
from scipy.interpolate import CubicSpline, make_interp_spline

from . import _kernels
from .errors import DomainError, NoBracket, NodeAtBoundary

log = logging.getLogger(__name__)

# one-sided 6-point first-derivative stencil, error O(h^5)
_FD_BACKWARD = np.array([137.0 / 60.0, -5.0, 5.0, -10.0 / 3.0, 5.0 / 4.0, -1.0 / 5.0])


@dataclass(frozen=True)
class RadialPotential:
    """Spherically symmetric potential inside a sphere.

    ``kind="constant"``: V = -depth for r < radius and V = outside beyond it.
    ``kind="tabulated"``: cubic-spline interpolation of (r_table, v_table).
    """

    kind: str = "constant"
    depth: float = 0.0
    radius: float = math.inf
    outside: float = 0.0
    r_table: tuple = ()
    v_table: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "tabulated"):
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.kind == "tabulated":
            r = np.asarray(self.r_table, dtype=np.float64)
            v = np.asarray(self.v_table, dtype=np.float64)
            if r.ndim != 1 or r.shape != v.shape or r.size < 4:
                raise DomainError("tabulated potential needs matching 1-D tables of >= 4 points")
            if not np.all(np.diff(r) > 0) or r[0] < 0:
                raise DomainError("tabulated radial grid must be non-negative and strictly increasing")
            if not np.all(np.isfinite(v)):
                raise DomainError("tabulated potential must be finite")

    @classmethod
    def well(cls, depth, radius=math.inf):
        return cls(kind="constant", depth=float(depth), radius=float(radius))

    @classmethod
    def zero(cls):
        return cls(kind="constant", depth=0.0)

    @classmethod
    def tabulated(cls, r, v):
        r = np.asarray(r, dtype=np.float64)
        return cls(kind="tabulated", radius=float(r[-1]), r_table=tuple(r), v_table=tuple(np.asarray(v, dtype=np.float64)))

    def shifted(self, c):
        """The potential V + c."""
        if self.kind == "constant":
            return RadialPotential("constant", self.depth - c, self.radius, self.outside + c)
        return RadialPotential("tabulated", radius=self.radius, r_table=self.r_table,
                               v_table=tuple(np.asarray(self.v_table) + c))

    @cached_property
    def _spline(self):
        return CubicSpline(np.asarray(self.r_table), np.asarray(self.v_table))

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        if self.kind == "constant":
            return np.where(r < self.radius, -self.depth, self.outside)
        return self._spline(r)


@dataclass(frozen=True, eq=False)
class RadialSolution:
    """Regular solution chi_l(r, E) on a uniform grid of (0, R], scaled to max|chi| = 1."""

    l: int
    E: float
    grid: np.ndarray
    chi: np.ndarray
    chi_at_R: float
    dchi_at_R: float
    _interp: object = field(default=None, repr=False)

    @property
    def R(self):
        return float(self.grid[-1])

    @property
    def radial_at_R(self):
        """R_l(R) = chi(R) / R, the multiplicative radial factor on the sphere."""
        return self.chi_at_R / self.R

    def chi_at(self, r, nu=0):
        """chi (nu=0) or its derivative (nu=1) at arbitrary radii in [0, R]."""
        return self._interp(np.asarray(r, dtype=np.float64), nu)

    def radial(self, r):
        """R_l(r) = chi(r)/r, regular at r = 0."""
        r = np.asarray(r, dtype=np.float64)
        safe = np.where(r > 0, r, 1.0)
        val = self.chi_at(r) / safe
        if self.l == 0:
            val = np.where(r > 0, val, self.chi_at(0.0, 1))
        else:
            val = np.where(r > 0, val, 0.0)
        return val


def integrate_radial(pot, l, E, R, n_grid=1000):
    """Numerov integration of the regular radial solution on a uniform grid of (0, R].

    The first two points are seeded from the small-r series
    chi = r^{l+1} (1 + (V(0) - E) r^2 / (2(2l+3))), which keeps the O(h^4) order.

    Raises
    ------
    NodeAtBoundary
        If |chi(R)| < 1e-12 max|chi|.
    """
    if n_grid < 100:
        raise DomainError("n_grid must be at least 100")
    if not R > 0:
        raise DomainError("R must be positive")
    h = R / n_grid
    r = h * np.arange(n_grid + 1)
    v = pot(r)
    g = np.empty_like(r)
    g[0] = 0.0
    g[1:] = l * (l + 1) / r[1:] ** 2 + v[1:] - E
    c2 = (float(v[0]) - E) / (2.0 * (2 * l + 3))
    y1 = 1e-200 * (1.0 + c2 * h * h)
    y2 = 1e-200 * 2.0 ** (l + 1) * (1.0 + 4.0 * c2 * h * h)
    chi = _kernels.numerov_outward(g, h, y1, y2)
    chi = chi / np.max(np.abs(chi))
    chi_R = float(chi[-1])
    dchi_R = float(_FD_BACKWARD @ chi[-1:-7:-1]) / h
    if abs(chi_R) < 1e-12:
        raise NodeAtBoundary(f"chi_{l}(R={R}, E={E}) vanishes (|chi(R)| = {abs(chi_R):.3e})", l=l, energy=E)
    interp = make_interp_spline(r, chi, k=5)
    return RadialSolution(l, float(E), r, chi, chi_R, dchi_R, interp)


def _well_params(V0, E):
    if not (-V0 < E < 0):
        raise DomainError(f"energy {E} outside the bound-state window (-{V0}, 0)")
    return math.sqrt(V0 - abs(E)), math.sqrt(abs(E))


def well_matching_residual(V0, a, E):
    """Wronskian of sin(alpha r) and exp(-beta r) at r = a; zero exactly at bound states.

    W = chi_in(a) chi_out'(a) - chi_in'(a) chi_out(a)
      = -exp(-beta a) [beta sin(alpha a) + alpha cos(alpha a)].
    """
    alpha, beta = _well_params(V0, E)
    decay = math.exp(-beta * a)
    return -decay * (beta * math.sin(alpha * a) + alpha * math.cos(alpha * a))


def _bisect(f, lo, hi, tol):
    f_lo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_well_residual(V0, a, n_scan=1000):
    """Residual samples on a uniform energy grid strictly inside (-V0, 0)."""
    eps = 1e-9 * V0
    grid = np.linspace(-V0 + eps, -eps, n_scan)
    values = np.array([well_matching_residual(V0, a, e) for e in grid])
    return grid, values


def find_bound_state(V0, a, tol=1e-10, n_scan=1000):
    """Lowest s-wave bound state of the square well of depth V0 and radius a.

    Scans ``n_scan`` energies for sign changes of the matching residual and
    refines the lowest bracket by bisection to |dE| < tol.
    """
    grid, values = scan_well_residual(V0, a, n_scan)
    brackets = np.nonzero(np.signbit(values[:-1]) != np.signbit(values[1:]))[0]
    if brackets.size == 0:
        raise NoBracket(f"no bound state for V0={V0}, a={a} (V0 a^2 = {V0 * a * a:.6g})", grid, values)
    if brackets.size > 1:
        log.info("%d bound states bracketed; returning the lowest", brackets.size)
    i = int(brackets[0])
    return _bisect(lambda e: well_matching_residual(V0, a, e), grid[i], grid[i + 1], tol)


def well_norm_integrals(V0, a, E):
    """(int_0^a sin^2(alpha r) dr, int_a^inf exp(-2 beta r) dr)."""
    alpha, beta = _well_params(V0, E)
    inner = a / 2.0 - math.sin(2.0 * alpha * a) / (4.0 * alpha)
    outer = math.exp(-2.0 * beta * a) / (2.0 * beta)
    return inner, outer


def normalize_well_state(V0, a, E):
    """Amplitudes (A, C) of the continuous, unit-norm s-wave state at energy E."""
    alpha, beta = _well_params(V0, E)
    inner, outer = well_norm_integrals(V0, a, E)
    ratio = math.sin(alpha * a) / math.exp(-beta * a)
    A = 1.0 / math.sqrt(inner + ratio * ratio * outer)
    return A, A * ratio
