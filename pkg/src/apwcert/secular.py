"""Secular matrices of piecewise bases, generalized eigensolves and reference problems.

Matrix elements use the broken (region-wise) form

    h_ij = sum_regions <grad u_i, grad u_j> + <u_i, V u_j>,   s_ij = sum_regions <u_i, u_j>,

with no boundary terms at sphere surfaces. Interstitial integrals are closed
form; in-sphere integrals reduce to radial Gauss-Legendre quadrature.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import json
import logging
import math

import numpy as np
from scipy.linalg import cholesky, eigh, solve_triangular

from .apw_basis import ApwFunction, PiecewiseField
from .errors import (
    IncompatibleBasis,
    InvalidReciprocal,
    QuadratureBudgetExceeded,
    RadialNodeAtR,
    SingularOverlap,
)
from .radial import RadialPotential
from .special_fn import lm_arrays, n_lm

log = logging.getLogger(__name__)

N_RADIAL_QUAD = 400
MAX_WORK = 5e9


@dataclass(eq=False)
class SecularSystem:
    H: np.ndarray
    S: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def M(self):
        return self.H.shape[0]

    def to_json(self):
        def pairs(a):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, dtype=complex)]

        meta = {k: v for k, v in self.meta.items() if isinstance(v, (int, float, str, list))}
        return json.dumps({"M": self.M, "H": pairs(self.H), "S": pairs(self.S), "meta": meta})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)

        def unpair(rows):
            return np.array([[complex(re, im) for re, im in row] for row in rows])

        return cls(unpair(d["H"]), unpair(d["S"]), d.get("meta", {}))


def _cell_integral(cell, delta):
    """Integral of exp(i delta.x) over the parallelepiped spanned by the rows of ``cell``."""
    vol = abs(float(np.linalg.det(cell)))
    t = cell @ delta
    factors = np.ones_like(t, dtype=np.complex128)
    nz = np.abs(t) > 1e-14
    factors[nz] = np.expm1(1j * t[nz]) / (1j * t[nz])
    return vol * np.prod(factors)


def _ball_integral(delta, R):
    """Integral of exp(i delta.x) over a ball of radius R centred at the origin."""
    p = float(np.linalg.norm(delta))
    if p * R < 1e-6:
        return 4.0 * math.pi * R ** 3 / 3.0 * (1.0 - (p * R) ** 2 / 10.0)
    x = p * R
    j1 = (math.sin(x) / x - math.cos(x)) / x
    return 4.0 * math.pi * R * R * j1 / p


@lru_cache(maxsize=8)
def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


class _RadialTable:
    """chi, chi' at the Gauss-Legendre nodes of (0, R), cached per RadialSolution."""

    def __init__(self, R, n=N_RADIAL_QUAD):
        x, w = gauss_legendre(n)
        self.r = 0.5 * R * (x + 1.0)
        self.w = 0.5 * R * w
        self._cache = {}

    def values(self, sol):
        key = id(sol)
        hit = self._cache.get(key)
        if hit is None:
            chi = sol.chi_at(self.r)
            dchi = sol.chi_at(self.r, 1)
            hit = (sol, chi, dchi - chi / self.r)
            self._cache[key] = hit
        return hit[1], hit[2]


def _radial_blocks(table, sol_a, sol_b, l, pot):
    """(overlap, kinetic + potential) radial integrals for one l channel."""
    chi_a, d_a = table.values(sol_a)
    chi_b, d_b = table.values(sol_b)
    r, w = table.r, table.w
    prod = chi_a * chi_b
    overlap = w @ prod
    kinetic = w @ (d_a * d_b + l * (l + 1) * prod / (r * r))
    potential = w @ (pot(r) * prod)
    return overlap, kinetic + potential


def assemble(basis, geom=None, potentials=None, v_interstitial=0.0, n_quad=N_RADIAL_QUAD):
    """Secular matrices (H, S) of a list of APWs or PiecewiseFields.

    ``potentials`` gives the RadialPotential of each sphere (one shared
    potential is accepted); the interstitial potential is the constant
    ``v_interstitial``.
    """
    fields = [b.to_field() if isinstance(b, ApwFunction) else b for b in basis]
    if not fields:
        raise ValueError("empty basis")
    geom = fields[0].geometry if geom is None else geom
    k0 = np.asarray(fields[0].k, dtype=np.float64)
    for fld in fields:
        if not np.allclose(fld.k, k0, atol=1e-12):
            raise IncompatibleBasis("basis functions carry different Bloch wavevectors k")
    if potentials is None:
        potentials = RadialPotential.zero()
    if isinstance(potentials, RadialPotential):
        potentials = [potentials] * geom.n_spheres
    M = len(fields)
    lmax_all = max([len(rad) - 1 for fld in fields for terms in fld.interiors for rad, _ in terms] or [0])
    work = M * M * n_lm(lmax_all) * n_quad
    if work > MAX_WORK:
        raise QuadratureBudgetExceeded(f"assembly work {work:.3g} exceeds budget {MAX_WORK:.3g}")

    H = np.zeros((M, M), dtype=np.complex128)
    S = np.zeros((M, M), dtype=np.complex128)

    # interstitial: cell integral minus the spheres
    for i, fi in enumerate(fields):
        for j in range(i, M):
            fj = fields[j]
            s_ij = 0j
            h_ij = 0j
            for p, bp in fi.plane_waves:
                for q, bq in fj.plane_waves:
                    delta = np.asarray(q) - np.asarray(p)
                    integral = _cell_integral(geom.cell, delta)
                    for a in range(geom.n_spheres):
                        integral -= np.exp(1j * float(delta @ geom.centers[a])) * _ball_integral(delta, geom.radii[a])
                    amp = np.conj(bp) * bq * integral
                    s_ij += amp
                    h_ij += amp * (float(np.dot(p, q)) + v_interstitial)
            S[i, j] += s_ij
            H[i, j] += h_ij

    # spheres: orthogonality of Y_lm leaves one radial integral per l
    for a in range(geom.n_spheres):
        table = _RadialTable(float(geom.radii[a]), n_quad)
        pot = potentials[a]
        blocks = {}
        for i, fi in enumerate(fields):
            for j in range(i, M):
                fj = fields[j]
                s_ij = 0j
                h_ij = 0j
                for rad_a, c_a in fi.interiors[a]:
                    for rad_b, c_b in fj.interiors[a]:
                        lmax = min(len(rad_a), len(rad_b)) - 1
                        key = (id(rad_a), id(rad_b))
                        if key not in blocks:
                            ov = np.empty(lmax + 1)
                            hk = np.empty(lmax + 1)
                            for l in range(lmax + 1):
                                ov[l], hk[l] = _radial_blocks(table, rad_a[l], rad_b[l], l, pot)
                            blocks[key] = (ov, hk)
                        ov, hk = blocks[key]
                        ls, _ = lm_arrays(lmax)
                        nl = n_lm(lmax)
                        prod = np.conj(c_a[:nl]) * c_b[:nl]
                        s_ij += prod @ ov[ls]
                        h_ij += prod @ hk[ls]
                S[i, j] += s_ij
                H[i, j] += h_ij

    iu = np.triu_indices(M, 1)
    S[iu[1], iu[0]] = np.conj(S[iu])
    H[iu[1], iu[0]] = np.conj(H[iu])
    S = 0.5 * (S + S.conj().T)
    H = 0.5 * (H + H.conj().T)
    radial_values = [
        sol.chi_at_R for fld in fields for terms in fld.interiors for rad, _ in terms for sol in rad
    ]
    meta = {"k": k0.tolist(), "radial_values": np.array(radial_values)}
    return SecularSystem(H, S, meta)


def solve_generalized(sys):
    """Ascending eigenpairs of H c = E S c with S-orthonormal eigenvectors (columns).

    Raises
    ------
    SingularOverlap
        If the smallest eigenvalue of S is below 1e-10 times the largest.
    """
    S = np.asarray(sys.S)
    H = np.asarray(sys.H)
    s_eig = np.linalg.eigvalsh(S)
    if not s_eig[-1] > 0 or s_eig[0] <= 1e-10 * s_eig[-1]:
        raise SingularOverlap(f"overlap matrix is singular or indefinite (min eigenvalue {s_eig[0]:.3e})", s_eig[0])
    L = cholesky(S, lower=True)
    Y = solve_triangular(L, H, lower=True)
    reduced = solve_triangular(L, Y.conj().T, lower=True).conj().T
    reduced = 0.5 * (reduced + reduced.conj().T)
    vals, vecs = eigh(reduced)
    coeffs = solve_triangular(L.conj().T, vecs, lower=False)
    return vals, coeffs


def pencil_sign(sys, E):
    """Sign of det(H - E S), from the signs of the Hermitian pencil's eigenvalues."""
    ev = np.linalg.eigvalsh(sys.H - E * sys.S)
    if np.any(ev == 0.0):
        return 0
    return -1 if np.count_nonzero(ev < 0) % 2 else 1


@dataclass
class ScanResult:
    roots: list
    excluded: list
    grid: np.ndarray

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    def __getitem__(self, i):
        return self.roots[i]


def scan_nonlinear_secular(builder, E_range, n_scan=200, tol=1e-8):
    """Roots of E -> det(H(E) - E S(E)) for an energy-dependent basis.

    Sign changes on an ``n_scan`` grid are refined by bisection. Where a
    radial value chi_l(R, E) changes sign the matching coefficients pass
    through a pole; such points are located by bisection and reported as
    excluded intervals instead of roots.
    """
    lo, hi = map(float, E_range)
    grid = np.linspace(lo, hi, n_scan)
    pole_width = max(tol, 1e-9 * max(1.0, abs(hi - lo)))

    def probe(E):
        try:
            sys = builder(E)
        except RadialNodeAtR:
            return None
        return pencil_sign(sys, E), np.sign(np.asarray(sys.meta.get("radial_values", []), dtype=float))

    def locate_pole(a, b, pa, pb):
        idx = np.nonzero(pa[1] != pb[1])[0][0]
        s_a = pa[1][idx]
        while b - a > pole_width:
            m = 0.5 * (a + b)
            pm = probe(m)
            if pm is None:
                return m
            if pm[1][idx] == s_a:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    def refine_root(a, b, sa):
        while b - a > tol:
            m = 0.5 * (a + b)
            pm = probe(m)
            if pm is None:
                break
            if pm[0] == 0:
                return m
            if pm[0] == sa:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    roots, excluded = [], []

    def search(a, b, pa, pb, depth=0):
        if pa is None or pb is None:
            return
        if pa[1].shape == pb[1].shape and np.any(pa[1] != pb[1]) and depth < 40:
            p = locate_pole(a, b, pa, pb)
            left, right = p - pole_width, p + pole_width
            excluded.append((left, right))
            pl, pr = probe(left), probe(right)
            if left > a:
                search(a, left, pa, pl, depth + 1)
            if right < b:
                search(right, b, pr, pb, depth + 1)
            return
        if pa[0] == 0:
            roots.append(a)
        elif pa[0] != pb[0] and pb[0] != 0:
            roots.append(refine_root(a, b, pa[0]))

    probes = [probe(E) for E in grid]
    for i, p in enumerate(probes):
        if p is None:
            excluded.append((grid[i], grid[i]))
    for i in range(n_scan - 1):
        search(grid[i], grid[i + 1], probes[i], probes[i + 1])
    if probes[-1] is not None and probes[-1][0] == 0:
        roots.append(grid[-1])
    roots = sorted(set(float(r) for r in roots))
    return ScanResult(roots, sorted(excluded), grid)


def validate_reciprocal(G_list, cell, tol=1e-9):
    G = np.atleast_2d(np.asarray(G_list, dtype=np.float64))
    n = G @ np.asarray(cell).T / (2.0 * math.pi)
    if np.any(np.abs(n - np.round(n)) > tol):
        raise InvalidReciprocal("G . a_i must be an integer multiple of 2 pi for every lattice vector")
    return G


def empty_lattice_bands(k, G_list, cell):
    """Sorted |k + G|^2, the eigenvalues of -Laplacian on Bloch waves of wavevector k."""
    geom_cell = getattr(cell, "cell", cell)
    G = validate_reciprocal(G_list, geom_cell)
    q = np.asarray(k, dtype=np.float64) + G
    return np.sort(np.einsum("ij,ij->i", q, q))


def _interval_basis(bc, n_modes):
    if bc.lower().startswith("d"):
        ns = np.arange(1, n_modes + 1)
        return (lambda x: np.sin(np.outer(x, ns))), (lambda x: np.cos(np.outer(x, ns)) * ns)
    if bc.lower().startswith("n"):
        ns = np.arange(0, n_modes)
        return (lambda x: np.cos(np.outer(x, ns))), (lambda x: -np.sin(np.outer(x, ns)) * ns)
    raise ValueError(f"unknown boundary condition {bc!r}")


def interval_ritz_values(values, derivs, n_quad=128):
    """Rayleigh-Ritz values of -d^2/dx^2 on (0, pi) for trial functions given as callables.

    ``values(x)`` and ``derivs(x)`` return arrays of shape (len(x), n_functions).
    """
    x, w = gauss_legendre(n_quad)
    x = 0.5 * math.pi * (x + 1.0)
    w = 0.5 * math.pi * w
    f = values(x)
    df = derivs(x)
    S = f.T @ (w[:, None] * f)
    H = df.T @ (w[:, None] * df)
    vals, _ = solve_generalized(SecularSystem(H, S))
    return vals


def interval_laplacian_demo(bc, n_modes=4):
    """Lowest Ritz value on (0, pi) with a sine (Dirichlet) or cosine (Neumann) basis."""
    if n_modes < 2:
        raise ValueError("n_modes must be at least 2")
    values, derivs = _interval_basis(bc, n_modes)
    return float(interval_ritz_values(values, derivs)[0])
