"""Augmented plane waves on muffin-tin geometries and their boundary jumps.

An APW with wavevector q = k + G is the plane wave exp(i q.x) in the
interstitial region; inside sphere alpha (center c, radius R) it is

    exp(i q.c) sum_{l <= l_max, m} A_lm R_l(r, E) Y_lm(r_hat),

with R_l = chi_l / r the regular radial solution at energy E and A_lm fixed
so that the (l, m) components of the two sides agree on the sphere.
Components with l > l_max are left unmatched; they are the boundary jump.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .errors import GeometryError, IncompatibleBasis, NodeAtBoundary, OutOfCell, RadialNodeAtR
from .radial import RadialPotential, integrate_radial
from .special_fn import (
    FOUR_PI,
    cartesian_to_spherical,
    lm_arrays,
    n_lm,
    spherical_bessel_j_all,
    spherical_harmonics_all,
    spherical_harmonics_at,
)

DEFAULT_EXTRA_L = 34
_TAIL_TERMS = 60


@dataclass(frozen=True, eq=False)
class MuffinTinGeometry:
    """Unit cell spanned by the rows of ``cell`` with non-overlapping spheres inside it."""

    cell: np.ndarray
    centers: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    radii: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        cell = np.atleast_2d(np.asarray(self.cell, dtype=np.float64))
        dim = cell.shape[0]
        centers = np.asarray(self.centers, dtype=np.float64).reshape(-1, dim)
        radii = np.asarray(self.radii, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "cell", cell)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        self.validate()

    @classmethod
    def cubic(cls, side, centers=(), radii=()):
        return cls(side * np.eye(3), np.asarray(centers, dtype=np.float64).reshape(-1, 3), radii)

    @property
    def dim(self):
        return self.cell.shape[0]

    @property
    def n_spheres(self):
        return self.radii.shape[0]

    @property
    def volume(self):
        return abs(float(np.linalg.det(self.cell)))

    @property
    def reciprocal(self):
        """Rows b_j with a_i . b_j = 2 pi delta_ij."""
        return 2.0 * math.pi * np.linalg.inv(self.cell).T

    def validate(self):
        cell = self.cell
        if cell.shape[0] != cell.shape[1]:
            raise GeometryError("cell must be a square matrix of lattice vectors", "(A')")
        scale = np.prod(np.linalg.norm(cell, axis=1))
        if not scale > 0 or abs(np.linalg.det(cell)) <= 1e-12 * scale:
            raise GeometryError("cell vectors are linearly dependent", "(A')")
        if self.centers.shape[0] != self.radii.shape[0]:
            raise GeometryError("one radius per sphere center is required", "(A')")
        if np.any(~(self.radii > 0)):
            raise GeometryError("sphere radii must be positive", "(A')")
        if self.n_spheres == 0:
            return
        frac = self.fractional(self.centers)
        recip_norm = np.linalg.norm(self.reciprocal, axis=1)
        near = 2.0 * math.pi * frac / recip_norm
        far = 2.0 * math.pi * (1.0 - frac) / recip_norm
        for a in range(self.n_spheres):
            if np.min(near[a]) <= self.radii[a] or np.min(far[a]) <= self.radii[a]:
                raise GeometryError(f"sphere {a} is not strictly inside the open cell", "(A')")
            for b in range(a):
                d = np.linalg.norm(self.centers[a] - self.centers[b])
                if d <= self.radii[a] + self.radii[b]:
                    raise GeometryError(f"spheres {b} and {a} overlap (Omega_a and Omega_b must be disjoint)", "(A')")

    def fractional(self, x):
        return np.atleast_2d(np.asarray(x, dtype=np.float64)) @ np.linalg.inv(self.cell)

    def in_cell(self, x, tol=1e-12):
        f = self.fractional(x)
        return np.all((f >= -tol) & (f <= 1.0 + tol), axis=1)

    def locate(self, x):
        """Index of the sphere containing each point (closed balls), -1 for the interstitial."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        where = np.full(x.shape[0], -1)
        for a in range(self.n_spheres):
            inside = np.linalg.norm(x - self.centers[a], axis=1) <= self.radii[a]
            where[inside] = a
        return where

    def to_dict(self):
        return {"cell": self.cell.tolist(), "centers": self.centers.tolist(), "radii": self.radii.tolist()}


def reciprocal_vectors(geom, n_max=1):
    """All G = sum n_i b_i with |n_i| <= n_max, sorted by length."""
    rng = np.arange(-n_max, n_max + 1)
    grids = np.meshgrid(*([rng] * geom.dim), indexing="ij")
    ints = np.column_stack([g.ravel() for g in grids])
    G = ints @ geom.reciprocal
    lengths = np.round(np.linalg.norm(G, axis=1), 12)
    order = sorted(range(len(G)), key=lambda i: (lengths[i], tuple(ints[i])))
    return G[order]


def shortest_reciprocal_vectors(geom, count, k=None):
    """The ``count`` reciprocal vectors with the smallest |k + G|."""
    k = np.zeros(geom.dim) if k is None else np.asarray(k, dtype=np.float64)
    n_max = 1
    while (2 * n_max + 1) ** geom.dim < 4 * count:
        n_max += 1
    G = reciprocal_vectors(geom, n_max + 1)
    lengths = np.round(np.linalg.norm(k + G, axis=1), 12)
    order = np.argsort(lengths, kind="stable")
    return G[order[:count]]


def rayleigh_coefficients(q, center, R, l_eval):
    """Coefficients c_lm of exp(i q.x) restricted to the sphere |x - center| = R.

    c_lm = 4 pi i^l j_l(|q| R) conj(Y_lm(q_hat)) exp(i q.center), so that the
    trace equals sum_lm c_lm Y_lm(theta, phi).
    """
    q = np.asarray(q, dtype=np.float64)
    qn = float(np.linalg.norm(q))
    _, theta, phi = cartesian_to_spherical(q if qn > 0 else np.array([0.0, 0.0, 1.0]))
    ylm = spherical_harmonics_all(l_eval, theta, phi)[0]
    ls, _ = lm_arrays(l_eval)
    jl = spherical_bessel_j_all(l_eval, qn * R)
    phase = np.exp(1j * float(q @ np.asarray(center, dtype=np.float64)))
    return FOUR_PI * (1j ** ls) * jl[ls] * np.conj(ylm) * phase


def rayleigh_tail_sq(qR, l_eval, terms=_TAIL_TERMS):
    """sum_{l > l_eval} sum_m |c_lm|^2 = sum_{l > l_eval} 4 pi (2l+1) j_l(qR)^2."""
    jl = spherical_bessel_j_all(l_eval + terms, qR)
    ls = np.arange(l_eval + 1, l_eval + terms + 1)
    return float(np.sum(FOUR_PI * (2 * ls + 1) * jl[ls] ** 2))


@lru_cache(maxsize=4096)
def radial_set(pot, E, R, l_max, n_grid=1000):
    """Radial solutions chi_0..chi_lmax at energy E for one sphere (cached)."""
    out = []
    for l in range(l_max + 1):
        try:
            out.append(integrate_radial(pot, l, E, R, n_grid))
        except NodeAtBoundary as exc:
            raise RadialNodeAtR(str(exc), l=l, energy=E) from exc
    return tuple(out)


def apw_matching_coefficients(q, sphere, radials, l_max):
    """A_lm = 4 pi i^l j_l(|q|R) conj(Y_lm(q_hat)) / R_l(R) for l <= l_max.

    ``sphere`` is ``(center, R)``; the exp(i q.center) phase is not included.
    """
    _, R = sphere
    for sol in radials[: l_max + 1]:
        if abs(sol.chi_at_R) <= 1e-12 * np.max(np.abs(sol.chi)):
            raise RadialNodeAtR(f"chi_{sol.l}(R, E={sol.E}) vanishes", l=sol.l, energy=sol.E)
    c = rayleigh_coefficients(q, np.zeros(3), R, l_max)
    ls, _ = lm_arrays(l_max)
    at_R = np.array([sol.radial_at_R for sol in radials[: l_max + 1]])
    return c / at_R[ls]


@dataclass(frozen=True, eq=False)
class ApwFunction:
    """One APW basis function v_G at wavevector k + G and energy parameter E."""

    k: np.ndarray
    G: np.ndarray
    E: float
    l_max: int
    geometry: MuffinTinGeometry
    radials: tuple
    coeffs: tuple

    @property
    def q(self):
        return np.asarray(self.k) + np.asarray(self.G)

    def phase(self, alpha):
        return np.exp(1j * float(self.q @ self.geometry.centers[alpha]))

    def interior_coeffs(self, alpha):
        """Coefficients of the interior expansion including the exp(i q.c) phase."""
        return self.phase(alpha) * self.coeffs[alpha]

    def to_field(self):
        terms = [[(self.radials[a], self.interior_coeffs(a))] for a in range(self.geometry.n_spheres)]
        return PiecewiseField(self.geometry, self.k, [(self.q, 1.0 + 0j)], terms)


def make_apw(geom, potentials, k, G, E, l_max, n_grid=1000):
    """Build the APW v_G with energy parameter E.

    ``potentials`` holds one RadialPotential per sphere (a single potential is
    shared by all spheres).
    """
    if isinstance(potentials, RadialPotential):
        potentials = [potentials] * geom.n_spheres
    k = np.asarray(k, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    q = k + G
    radials, coeffs = [], []
    for a in range(geom.n_spheres):
        R = float(geom.radii[a])
        rs = radial_set(potentials[a], float(E), R, int(l_max), int(n_grid))
        radials.append(rs)
        coeffs.append(apw_matching_coefficients(q, (geom.centers[a], R), rs, l_max))
    return ApwFunction(k, G, float(E), int(l_max), geom, tuple(radials), tuple(coeffs))


@dataclass(frozen=True)
class BoundaryJump:
    """Exterior-minus-interior trace coefficients on sphere ``alpha``."""

    alpha: int
    R: float
    coeffs: np.ndarray
    l_max: int = -1
    tail_sq: float = 0.0

    @property
    def l_eval(self):
        return int(round(math.sqrt(self.coeffs.shape[0]))) - 1

    def __add__(self, other):
        if other.alpha != self.alpha:
            raise ValueError("jumps live on different spheres")
        a, b = _pad_pair(self.coeffs, other.coeffs)
        tail = (math.sqrt(self.tail_sq) + math.sqrt(other.tail_sq)) ** 2
        return BoundaryJump(self.alpha, self.R, a + b, min(self.l_max, other.l_max), tail)

    def scaled(self, c):
        return BoundaryJump(self.alpha, self.R, c * self.coeffs, self.l_max, abs(c) ** 2 * self.tail_sq)


def _pad_pair(a, b):
    n = max(a.shape[0], b.shape[0])
    return np.pad(a, (0, n - a.shape[0])), np.pad(b, (0, n - b.shape[0]))


def boundary_jump(f, alpha, l_eval=None):
    """Trace difference of an APW across sphere ``alpha``, up to degree ``l_eval``.

    Entries with l <= l_max vanish by construction; the remainder is the
    plane-wave Rayleigh tail. ``tail_sq`` bounds what lies beyond ``l_eval``.
    """
    if l_eval is None:
        l_eval = f.l_max + DEFAULT_EXTRA_L
    if l_eval <= f.l_max:
        raise ValueError("l_eval must exceed l_max")
    geom = f.geometry
    R = float(geom.radii[alpha])
    exterior = rayleigh_coefficients(f.q, geom.centers[alpha], R, l_eval)
    ls, _ = lm_arrays(f.l_max)
    at_R = np.array([sol.radial_at_R for sol in f.radials[alpha]])
    interior = f.interior_coeffs(alpha) * at_R[ls]
    g = exterior.copy()
    g[: interior.shape[0]] -= interior
    tail = rayleigh_tail_sq(float(np.linalg.norm(f.q)) * R, l_eval)
    return BoundaryJump(alpha, R, g, f.l_max, tail)


def evaluate_apw(f, x):
    """Values of the APW at points ``x`` (shape (3,) or (n, 3)) in the closed cell."""
    return f.to_field().evaluate(x)


@dataclass(eq=False)
class PiecewiseField:
    """A tuple of region functions: plane-wave sum outside, radial expansions inside.

    ``plane_waves`` is a list of ``(q, amplitude)``. ``interiors[alpha]`` is a
    list of ``(radials, coeffs)`` terms meaning sum_lm coeffs_lm R_l(r) Y_lm,
    where ``radials[l]`` is a RadialSolution.
    """

    geometry: MuffinTinGeometry
    k: np.ndarray
    plane_waves: list
    interiors: list

    @staticmethod
    def combine(fields, weights):
        fields = list(fields)
        if not fields:
            raise ValueError("no fields to combine")
        k0 = np.asarray(fields[0].k)
        geom = fields[0].geometry
        pws, interiors = [], [[] for _ in range(geom.n_spheres)]
        for fld, w in zip(fields, weights):
            if not np.allclose(fld.k, k0, atol=1e-12):
                raise IncompatibleBasis("fields carry different Bloch wavevectors")
            pws.extend((q, w * amp) for q, amp in fld.plane_waves)
            for a in range(geom.n_spheres):
                interiors[a].extend((rad, w * c) for rad, c in fld.interiors[a])
        return PiecewiseField(geom, k0, pws, interiors)

    def __add__(self, other):
        return PiecewiseField.combine([self, other], [1.0, 1.0])

    def __mul__(self, c):
        return PiecewiseField.combine([self], [c])

    __rmul__ = __mul__

    def exterior_trace(self, alpha, l_eval):
        R = float(self.geometry.radii[alpha])
        c = self.geometry.centers[alpha]
        out = np.zeros(n_lm(l_eval), dtype=np.complex128)
        for q, amp in self.plane_waves:
            out += amp * rayleigh_coefficients(q, c, R, l_eval)
        return out

    def interior_trace(self, alpha, l_eval):
        out = np.zeros(n_lm(l_eval), dtype=np.complex128)
        for radials, coeffs in self.interiors[alpha]:
            lmax = min(len(radials) - 1, l_eval)
            ls, _ = lm_arrays(lmax)
            at_R = np.array([sol.radial_at_R for sol in radials[: lmax + 1]])
            out[: n_lm(lmax)] += coeffs[: n_lm(lmax)] * at_R[ls]
        return out

    def jump(self, alpha, l_eval):
        R = float(self.geometry.radii[alpha])
        g = self.exterior_trace(alpha, l_eval) - self.interior_trace(alpha, l_eval)
        tail = 0.0
        for q, amp in self.plane_waves:
            tail += abs(amp) * math.sqrt(rayleigh_tail_sq(float(np.linalg.norm(q)) * R, l_eval))
        return BoundaryJump(alpha, R, g, -1, tail * tail)

    def evaluate_exterior(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.zeros(x.shape[0], dtype=np.complex128)
        for q, amp in self.plane_waves:
            out += amp * np.exp(1j * (x @ np.asarray(q)))
        return out

    def evaluate_interior(self, alpha, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        rel = x - self.geometry.centers[alpha]
        r = np.linalg.norm(rel, axis=1)
        unit = np.where(r[:, None] > 0, rel / np.where(r > 0, r, 1.0)[:, None], [0.0, 0.0, 1.0])
        out = np.zeros(x.shape[0], dtype=np.complex128)
        for radials, coeffs in self.interiors[alpha]:
            lmax = len(radials) - 1
            y = spherical_harmonics_at(lmax, unit)
            ls, _ = lm_arrays(lmax)
            rad = np.column_stack([sol.radial(r) for sol in radials])
            out += np.sum(y * rad[:, ls] * coeffs[None, : n_lm(lmax)], axis=1)
        return out

    def evaluate(self, x):
        """Region-wise values; points on a sphere boundary use the interior expansion."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if not np.all(self.geometry.in_cell(x)):
            raise OutOfCell("evaluation point outside the closed unit cell")
        where = self.geometry.locate(x)
        out = np.empty(x.shape[0], dtype=np.complex128)
        outside = where < 0
        if np.any(outside):
            out[outside] = self.evaluate_exterior(x[outside])
        for a in range(self.geometry.n_spheres):
            sel = where == a
            if np.any(sel):
                out[sel] = self.evaluate_interior(a, x[sel])
        return out
