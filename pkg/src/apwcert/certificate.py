"""Jump-penalty certificates for secular eigenvalues of discontinuous bases.

For orthonormal trial tuples u^1..u^M the secular eigenvalues satisfy

    tilde_E_m >= E_m - C M^{5/2} sum_i sum_{alpha != beta} ||jump of u^i||_{H^{3/2}},

once M times the jump sum is below an (unknown) delta. C and delta are not
computable from the proofs, so C is either user-supplied or fitted and
always carries a provenance tag.
"""
from dataclasses import asdict, dataclass, field
import json
import math

import numpy as np

from .errors import NoBracket, ReferenceUnavailable
from .sobolev import SphereFunction, boundary_sobolev_norm

PROVENANCE = ("fitted", "user-supplied")


def penalty(M, jump_sums, C):
    """(C M^{5/2} sum jump_sums, smallness statistic M sum jump_sums)."""
    s = np.asarray(jump_sums, dtype=np.float64)
    if np.any(s < 0):
        raise ValueError("jump sums must be non-negative")
    if not C > 0:
        raise ValueError("C must be positive")
    total = float(np.sum(s))
    return C * M ** 2.5 * total, M * total


def jump_sum(jumps, s=1.5, ordered_pairs=True):
    """sum over interfaces of the H^s jump norms (tail bound included).

    Each sphere boundary is shared by one sphere and the interstitial; the
    sum over ordered pairs alpha != beta counts it twice.
    """
    total = 0.0
    for j in jumps:
        g = SphereFunction(j.R, j.coeffs)
        norm = boundary_sobolev_norm(g, s)
        if j.tail_sq:
            w = (1.0 + (g.l_eval + 1) * (g.l_eval + 2) / j.R ** 2) ** s
            norm += j.R * math.sqrt(w * j.tail_sq)
        total += norm
    return 2.0 * total if ordered_pairs else total


@dataclass
class Certificate:
    M: int
    tilde_E: list
    jump_sums: list
    C: float
    C_provenance: str
    penalty: float
    smallness_statistic: float
    extra: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.C_provenance not in PROVENANCE:
            raise ValueError(f"C_provenance must be one of {PROVENANCE}")

    @property
    def lower_bounds(self):
        """Ceilings on the true eigenvalues implied by the bound: E_m <= tilde_E_m + penalty."""
        return [e + self.penalty for e in self.tilde_E]

    def admissible(self, delta):
        """Whether the smallness condition M sum < delta holds for a user-chosen delta."""
        return self.smallness_statistic < delta

    def to_json(self):
        d = asdict(self)
        d.pop("extra")
        return json.dumps(d, sort_keys=False)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def certify(tilde_E, jump_sums, C, provenance="user-supplied", M=None):
    M = len(jump_sums) if M is None else int(M)
    pen, small = penalty(M, jump_sums, C)
    return Certificate(M, [float(e) for e in tilde_E], [float(s) for s in jump_sums], float(C), provenance, pen, small)


def combine_jumps(jumps, coeffs):
    """Jumps of sum_i c_i u^i from the per-basis jump sets, by linearity of traces."""
    n_spheres = len(jumps[0])
    out = []
    for a in range(n_spheres):
        acc = None
        for c, per in zip(coeffs, jumps):
            term = per[a].scaled(c)
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def a_posteriori(sys, eigvecs, jumps, m0, C, provenance="user-supplied", eigenvalues=None):
    """Certificate for the lowest m0 secular eigenvalues using phi^m = sum_i c_i^m u^i.

    ``jumps[i][alpha]`` is the BoundaryJump of basis function i on sphere
    alpha. M is replaced by m0 in the penalty.
    """
    M = sys.M
    if not 1 <= m0 <= M:
        raise ValueError("m0 must lie in [1, M]")
    if eigenvalues is None:
        from .secular import solve_generalized

        eigenvalues, eigvecs = solve_generalized(sys)
    sums = []
    for m in range(m0):
        phi_jumps = combine_jumps(jumps, eigvecs[:, m])
        sums.append(jump_sum(phi_jumps))
    cert = certify(list(eigenvalues[:m0]), sums, C, provenance, M=m0)
    cert.extra["basis_size"] = M
    return cert


def perturbation_chain_check(H, H_hat, rtol=1e-12):
    """Worst slack of |E_i - E_hat_i| <= ||H - H_hat||_2 <= sqrt(M) ||H - H_hat||_inf.

    Returns min(||dH||_2 - max_i |E_i - E_hat_i|, sqrt(M)||dH||_inf - ||dH||_2);
    the chain holds when the value is >= -rtol * scale.
    """
    H = np.asarray(H)
    H_hat = np.asarray(H_hat)
    if H.shape != H_hat.shape or H.shape[0] != H.shape[1]:
        raise ValueError("H and H_hat must be square and of equal size")
    M = H.shape[0]
    dH = H - H_hat
    gaps = np.abs(np.linalg.eigvalsh(H) - np.linalg.eigvalsh(H_hat))
    n2 = float(np.linalg.norm(dH, 2)) if M else 0.0
    ninf = float(np.max(np.sum(np.abs(dH), axis=1))) if M else 0.0
    return min(n2 - float(np.max(gaps, initial=0.0)), math.sqrt(M) * ninf - n2)


def chain_holds(H, H_hat, rtol=1e-12):
    scale = max(1.0, float(np.max(np.abs(H), initial=0.0)), float(np.max(np.abs(H_hat), initial=0.0)))
    return perturbation_chain_check(H, H_hat) >= -rtol * scale * max(1, np.asarray(H).shape[0])


@dataclass
class EmpiricalReport:
    amplitudes: list
    jump_norms: list
    reference: list
    tilde_E: list
    deficits: list
    C_fit: float
    slope_at_zero: float = float("nan")
    quadratic_fit: tuple = ()
    passes: bool = True


def verify_bound_empirical(problem, sweep):
    """Fit the least C with tilde_E_m >= E_m - C M^{5/2} (jump sum) over a sweep.

    ``problem`` is ``{"kind": "well", "V0", "a"}`` (sweep = gamma values) or
    ``{"kind": "lattice", ...}`` (sweep = l_max values, APWs at a fixed
    energy parameter on an empty lattice).
    """
    kind = problem.get("kind")
    if kind == "well":
        return _verify_well(problem, sweep)
    if kind == "lattice":
        return _verify_lattice(problem, sweep)
    raise ReferenceUnavailable(f"no reference eigenvalue for problem kind {kind!r}")


def _fit(deficits, jumps, M):
    ratios = [d / (M ** 2.5 * j) for d, j in zip(deficits, jumps) if j > 0]
    return max([0.0] + ratios)


def _verify_well(problem, gammas):
    from . import experiments

    V0 = float(problem.get("V0", 1.0))
    a = float(problem.get("a", math.pi))
    try:
        rows = experiments.run_well_sweep(V0, a, gammas)
    except NoBracket as exc:
        raise ReferenceUnavailable(f"well V0={V0}, a={a} has no bound state") from exc
    E1 = rows[0].tilde_E1 + rows[0].deficit
    jumps = [2.0 * r.jump_h32 for r in rows]  # ordered pairs (sphere, exterior) and back
    deficits = [r.deficit for r in rows]
    C_fit = _fit(deficits, jumps, 1)
    slope = experiments.sweep_slope(V0, a)
    fit = experiments.sweep_quadratic_fit(rows) if len(rows) >= 3 else ()
    ok = all(r.tilde_E1 >= E1 - C_fit * j - 1e-9 for r, j in zip(rows, jumps))
    return EmpiricalReport([r.gamma for r in rows], jumps, [E1] * len(rows), [r.tilde_E1 for r in rows],
                           deficits, C_fit, slope, fit, ok)


def _verify_lattice(problem, l_max_list):
    from .apw_basis import boundary_jump, make_apw, shortest_reciprocal_vectors
    from .experiments import default_geometry
    from .radial import RadialPotential
    from .secular import assemble, empty_lattice_bands, solve_generalized

    geom = default_geometry(problem.get("side", 2.0 * math.pi), problem.get("radius", 1.5))
    k = np.asarray(problem.get("k", [0.1, 0.2, 0.3]), dtype=np.float64)
    count = int(problem.get("G_count", 7))
    m = int(problem.get("m", 1))
    Gs = shortest_reciprocal_vectors(geom, count, k)
    ref = empty_lattice_bands(k, shortest_reciprocal_vectors(geom, 4 * count, k), geom.cell)[:m]
    E_param = float(problem.get("E_param", ref[0] + 0.3))
    pot = RadialPotential.zero()
    tildes, jumps_out, deficits = [], [], []
    for l_max in l_max_list:
        basis = [make_apw(geom, pot, k, G, E_param, int(l_max)) for G in Gs]
        sys = assemble(basis, geom, pot)
        vals, vecs = solve_generalized(sys)
        jumps = [[boundary_jump(f, a) for a in range(geom.n_spheres)] for f in basis]
        cert = a_posteriori(sys, vecs, jumps, m, 1.0, eigenvalues=vals)
        tildes.append(float(vals[m - 1]))
        jumps_out.append(float(sum(cert.jump_sums)))
        deficits.append(float(ref[m - 1] - vals[m - 1]))
    C_fit = _fit(deficits, jumps_out, m)
    ok = all(t >= ref[m - 1] - C_fit * m ** 2.5 * j - 1e-12 for t, j in zip(tildes, jumps_out))
    return EmpiricalReport(list(l_max_list), jumps_out, [float(ref[m - 1])] * len(tildes), tildes, deficits, C_fit,
                           passes=ok)
