"""Scripted studies: the discontinuous square-well sweep, APW convergence in l_max, and the interval demo.

Square-well conventions
-----------------------
The s-wave state is u(x) = chi(r) / (sqrt(4 pi) r) with chi = A sin(alpha r)
for r < a and chi = C exp(-beta r) beyond, alpha = sqrt(V0 + E), beta = sqrt(-E),
so that ||u|| = 1 is A^2 I_in + C^2 I_out = 1. The trace jump of u on |x| = a
has L^2 norm |delta| with delta = A sin(alpha a) - C exp(-beta a). The sweep
parameter gamma is the jump of r^{-1} chi, i.e. gamma = sqrt(4 pi) |delta|.
"""
from dataclasses import astuple, dataclass
import csv
import io
import logging
import math

import numpy as np

from .apw_basis import (
    MuffinTinGeometry,
    boundary_jump,
    make_apw,
    shortest_reciprocal_vectors,
)
from .errors import NoRealSolution, RadialNodeAtR
from .radial import RadialPotential, find_bound_state, well_norm_integrals, _well_params
from .secular import assemble, interval_ritz_values, interval_laplacian_demo, scan_nonlinear_secular, solve_generalized
from .sobolev import SphereFunction, boundary_sobolev_norm

log = logging.getLogger(__name__)

SQRT_4PI = math.sqrt(4.0 * math.pi)
DEFAULT_GAMMAS = tuple(round(0.01 * i, 2) for i in range(31))
CSV_HEADER = ("gamma", "tilde_E1", "jump_h32", "deficit")


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    tilde_E1: float
    jump_h32: float
    deficit: float


def well_amplitudes(V0, a, E, delta):
    """(A, C) with ||u|| = 1 and A sin(alpha a) - C exp(-beta a) = delta, on the branch continuous at delta = 0.

    Raises
    ------
    NoRealSolution
        If no real pair satisfies both constraints.
    """
    alpha, beta = _well_params(V0, E)
    inner, outer = well_norm_integrals(V0, a, E)
    s = math.sin(alpha * a)
    e = math.exp(-beta * a)
    # C = (A s - delta)/e substituted into the norm constraint
    qa = inner + s * s * outer / (e * e)
    qb = -2.0 * s * delta * outer / (e * e)
    qc = delta * delta * outer / (e * e) - 1.0
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        raise NoRealSolution(f"no unit-norm state with jump delta={delta:.6g} (discriminant {disc:.3e})")
    A = (-qb + math.sqrt(disc)) / (2.0 * qa)
    C = (A * s - delta) / e
    return A, C


def broken_well_energy(V0, a, E, A, C):
    """Region-wise <grad u, grad u> + <u, V u> for the two-piece s-wave state.

    For l = 0 the in-region kinetic integral of (chi' - chi/r)^2 equals
    int chi'^2 plus the boundary term -chi^2/r from each side.
    """
    alpha, beta = _well_params(V0, E)
    inner, outer = well_norm_integrals(V0, a, E)
    s = math.sin(alpha * a)
    e = math.exp(-beta * a)
    kin_in = A * A * alpha * alpha * (a / 2.0 + math.sin(2.0 * alpha * a) / (4.0 * alpha))
    kin_out = C * C * beta * beta * outer
    surface = (C * C * e * e - A * A * s * s) / a
    return kin_in + kin_out + surface - V0 * A * A * inner


def well_energy_at_jump(V0, a, delta, E1=None):
    """Broken-form energy of the sweep state with signed trace jump delta (L^2 norm of the jump of u)."""
    if E1 is None:
        E1 = find_bound_state(V0, a)
    A, C = well_amplitudes(V0, a, E1, delta)
    return broken_well_energy(V0, a, E1, A, C)


def run_well_sweep(V0=1.0, a=math.pi, gammas=DEFAULT_GAMMAS):
    """Energies of the discontinuous trial states along the gamma sweep (A increased, C decreased)."""
    E1 = float(find_bound_state(V0, a))
    rows = []
    for gamma in gammas:
        gamma = float(gamma)
        if gamma < 0:
            raise ValueError("gamma must be non-negative")
        delta = gamma / SQRT_4PI
        e = well_energy_at_jump(V0, a, delta, E1)
        # the jump of u is the constant delta / (sqrt(4 pi) a), i.e. g_00 = delta / a
        jump = boundary_sobolev_norm(SphereFunction(a, [delta / a]), 1.5)
        rows.append(SweepRow(gamma, float(e), float(jump), float(E1 - e)))
    return rows


def sweep_slope(V0=1.0, a=math.pi, h=1e-4):
    """Central-difference d tilde_E1 / d gamma at gamma = 0."""
    E1 = find_bound_state(V0, a)
    up = well_energy_at_jump(V0, a, h / SQRT_4PI, E1)
    down = well_energy_at_jump(V0, a, -h / SQRT_4PI, E1)
    return (up - down) / (2.0 * h)


def sweep_quadratic_fit(rows):
    """Least-squares coefficients (c0, c1, c2) of tilde_E1 = c0 + c1 gamma + c2 gamma^2."""
    g = np.array([r.gamma for r in rows])
    e = np.array([r.tilde_E1 for r in rows])
    c2, c1, c0 = np.polyfit(g, e, 2)
    return float(c0), float(c1), float(c2)


def write_sweep_csv(rows, path=None):
    """CSV with IEEE round-trip decimals; returns the text and writes it when ``path`` is given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([repr(float(v)) for v in astuple(row)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_sweep_csv(source):
    """Parse rows written by ``write_sweep_csv`` from a path or a text blob."""
    if "\n" in source:
        text = source
    else:
        with open(source) as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    return [SweepRow(*(float(x) for x in rec)) for rec in reader if rec]


def write_figure_pairs(rows, path):
    with open(path, "w") as fh:
        for r in rows:
            fh.write(f"{r.gamma!r} {r.tilde_E1!r}\n")


# ---------------------------------------------------------------- APW convergence

@dataclass
class ConvergenceRow:
    l_max: int
    root: float
    jump_h32: float
    certificate: object


def apw_builder(geom, potentials, k, Gs, l_max, n_grid=1000):
    """E -> SecularSystem for the energy-dependent APW basis {v_G(E)}."""

    def build(E):
        basis = [make_apw(geom, potentials, k, G, E, l_max, n_grid) for G in Gs]
        sys = assemble(basis, geom, potentials)
        sys.meta["basis"] = basis
        return sys

    return build


def run_apw_convergence(geom, V0, k, G_count, l_max_list, E_range=None, n_scan=120, C=1.0):
    """Lowest secular root, total jump norm and certificate for each l_max.

    Spheres carry a constant well of depth V0; the interstitial potential is 0.
    """
    from .certificate import a_posteriori

    k = np.asarray(k, dtype=np.float64)
    Gs = shortest_reciprocal_vectors(geom, G_count, k)
    pot = RadialPotential.well(V0) if V0 else RadialPotential.zero()
    e_free = float(np.min(np.sum((k + Gs) ** 2, axis=1)))
    if E_range is None:
        E_range = (e_free - V0 - 0.5, e_free + 0.5)
    rows = []
    for l_max in l_max_list:
        build = apw_builder(geom, pot, k, Gs, int(l_max))
        scan = scan_nonlinear_secular(build, E_range, n_scan=n_scan)
        if not scan.roots:
            log.warning("no secular root for l_max=%d in %s", l_max, E_range)
            rows.append(ConvergenceRow(int(l_max), float("nan"), float("nan"), None))
            continue
        root = scan.roots[0]
        sys = build(root)
        basis = sys.meta["basis"]
        jumps = [[boundary_jump(f, a) for a in range(geom.n_spheres)] for f in basis]
        vals, vecs = solve_generalized(sys)
        cert = a_posteriori(sys, vecs, jumps, 1, C, eigenvalues=vals)
        total = sum(_h32(j) for per in jumps for j in per)
        rows.append(ConvergenceRow(int(l_max), root, total, cert))
    return rows


def _h32(jump):
    return boundary_sobolev_norm(SphereFunction(jump.R, jump.coeffs), 1.5)


def run_empty_lattice_bands(geom, k, G_list, l_max=30):
    """APW secular eigenvalues with V = 0 and per-function energies E_i = |k + G_i|^2.

    Each APW is then the exact plane wave inside its sphere up to the
    l > l_max Rayleigh tail, so the eigenvalues reproduce |k + G|^2.
    Returns (eigenvalues, per-basis per-sphere L^2 jump norms).
    """
    k = np.asarray(k, dtype=np.float64)
    pot = RadialPotential.zero()
    basis = [make_apw(geom, pot, k, G, float(np.sum((k + G) ** 2)), l_max) for G in G_list]
    vals, _ = solve_generalized(assemble(basis, geom, pot))
    jumps = np.array([[_jump_l2(boundary_jump(f, a)) for a in range(geom.n_spheres)] for f in basis])
    return vals, jumps


def _jump_l2(jump):
    return math.sqrt(jump.R ** 2 * (float(np.sum(np.abs(jump.coeffs) ** 2)) + jump.tail_sq))


# ---------------------------------------------------------------- interval demo

@dataclass
class IntervalReport:
    dirichlet: float
    neumann: float
    constant_trial: float
    constant_is_upper_bound: bool
    polynomial_trial: float

    def as_dict(self):
        return {
            "dirichlet": self.dirichlet,
            "neumann": self.neumann,
            "constant_trial": self.constant_trial,
            "constant_is_upper_bound": self.constant_is_upper_bound,
            "polynomial_trial": self.polynomial_trial,
        }


def run_interval_demo(n_modes=4):
    """Rayleigh-Ritz with the right and the wrong form domain on (0, pi).

    The constant trial lies in the Neumann form domain but not in H^1_0;
    its quotient 0 undercuts the Dirichlet ground state 1 and is flagged.
    """
    d = interval_laplacian_demo("dirichlet", n_modes)
    n = interval_laplacian_demo("neumann", n_modes)
    const = float(interval_ritz_values(lambda x: np.ones((x.size, 1)), lambda x: np.zeros((x.size, 1)))[0])
    poly = float(interval_ritz_values(lambda x: (x * (math.pi - x))[:, None], lambda x: (math.pi - 2 * x)[:, None])[0])
    return IntervalReport(d, n, const, const >= d, poly)


def default_geometry(side=2.0 * math.pi, radius=1.5):
    """Cubic cell with one sphere at its center."""
    return MuffinTinGeometry.cubic(side, [[side / 2.0] * 3], [radius])
