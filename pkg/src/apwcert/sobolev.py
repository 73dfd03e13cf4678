"""Sobolev norms on spheres, extension operators on balls, and the surrogate behind the distance estimate.

Boundary norms use the Laplace-Beltrami realization

    ||g||_{H^s(S_R)}^2 = R^2 sum_lm (1 + l(l+1)/R^2)^s |g_lm|^2,

which for s = 0 is the L^2 surface norm. Any equivalent norm only changes
the unspecified constants of the equivalence results.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import json
import math

import numpy as np
from numpy.polynomial import Polynomial

from . import _kernels
from .errors import GeometryUnsupported
from .secular import gauss_legendre
from .special_fn import lm_arrays, n_lm, spherical_harmonics_at

N_RADIAL_QUAD = 400


def _lmax_of(n):
    lmax = int(round(math.sqrt(n))) - 1
    if n_lm(lmax) != n:
        raise ValueError(f"coefficient count {n} is not a perfect square")
    return lmax


@dataclass
class SphereFunction:
    """Function on the sphere of radius R given by coefficients g_lm over orthonormal Y_lm."""

    R: float
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128).ravel()
        _lmax_of(self.coeffs.size)
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("sphere coefficients must be finite")
        if not self.R > 0:
            raise ValueError("R must be positive")

    @property
    def l_eval(self):
        return _lmax_of(self.coeffs.size)

    @classmethod
    def zeros(cls, R, l_eval):
        return cls(R, np.zeros(n_lm(l_eval), dtype=np.complex128))

    @classmethod
    def from_samples(cls, R, quad, values, l_eval):
        return cls(R, quad.project(values, l_eval))

    def padded(self, l_eval):
        n = n_lm(l_eval)
        out = np.zeros(n, dtype=np.complex128)
        m = min(n, self.coeffs.size)
        out[:m] = self.coeffs[:m]
        return SphereFunction(self.R, out)

    def evaluate(self, unit_vectors):
        return spherical_harmonics_at(self.l_eval, unit_vectors) @ self.coeffs

    def __add__(self, other):
        l = max(self.l_eval, other.l_eval)
        return SphereFunction(self.R, self.padded(l).coeffs + other.padded(l).coeffs)

    def __sub__(self, other):
        return self + other * -1.0

    def __mul__(self, c):
        return SphereFunction(self.R, c * self.coeffs)

    __rmul__ = __mul__

    def to_json(self):
        ls, ms = lm_arrays(self.l_eval)
        rows = [[int(l), int(m), float(c.real), float(c.imag)] for l, m, c in zip(ls, ms, self.coeffs)]
        return json.dumps({"R": self.R, "coeffs": rows})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        rows = d["coeffs"]
        lmax = max((int(r[0]) for r in rows), default=0)
        c = np.zeros(n_lm(lmax), dtype=np.complex128)
        for l, m, re, im in rows:
            c[l * l + l + m] = complex(re, im)
        return cls(float(d["R"]), c)


def sobolev_weights(R, l_eval, s):
    ls, _ = lm_arrays(l_eval)
    return (1.0 + ls * (ls + 1) / (R * R)) ** s


def boundary_sobolev_norm(g, s=1.5):
    """H^s norm of a sphere function, ``R^2 sum (1 + l(l+1)/R^2)^s |g_lm|^2`` under the root."""
    if s < 0:
        raise ValueError("s must be non-negative")
    w = sobolev_weights(g.R, g.l_eval, s)
    return float(g.R * math.sqrt(np.sum(w * np.abs(g.coeffs) ** 2)))


# ---------------------------------------------------------------- radial profiles

def _ratio_profiles(l_max, r, R):
    """i_l(r)/i_l(R) and its first derivative for l = 0..l_max at radii r."""
    sR = _kernels.sph_in_scaled_array(l_max + 1, float(R))
    f = np.empty((r.size, l_max + 1))
    fp = np.empty((r.size, l_max + 1))
    ls = np.arange(l_max + 1)
    for i, ri in enumerate(r):
        s = _kernels.sph_in_scaled_array(l_max + 1, float(ri))
        damp = math.exp(ri - R)
        val = damp * s[:-1] / sR[:-1]
        # i_l' = i_{l+1} + l i_l / x
        der = damp * (s[1:] + ls * s[:-1] / ri) / sR[:-1]
        f[i] = val
        fp[i] = der
    return f, fp


def _power_profiles(l_max, r, R):
    ls = np.arange(l_max + 1)
    x = r[:, None] / R
    p0 = x ** ls
    p2 = x ** (ls + 2)
    return (p0, ls * x ** np.maximum(ls - 1, 0) / R, ls * (ls - 1) * x ** np.maximum(ls - 2, 0) / R ** 2), (
        p2, (ls + 2) * x ** (ls + 1) / R, (ls + 2) * (ls + 1) * x ** ls / R ** 2)


def mode_h2_norm_sq(l, r, w, f, fp, fpp):
    """H^2(ball) norm squared of f(r) Y_lm from radial quadrature (nodes r, weights w).

    Uses the vector spherical harmonic split of grad(f Y_lm) into degree l+1
    and l-1 channels, so that the Hessian norm reduces to two radial integrals.
    """
    f, fp, fpp = (np.asarray(a, dtype=np.complex128) for a in (f, fp, fpp))
    c1 = math.sqrt((l + 1) / (2 * l + 1))
    c2 = math.sqrt(l / (2 * l + 1))
    g1 = c1 * (fp - l * f / r)
    g1p = c1 * (fpp - l * fp / r + l * f / r ** 2)
    g2 = c2 * (fp + (l + 1) * f / r)
    g2p = c2 * (fpp + (l + 1) * fp / r - (l + 1) * f / r ** 2)
    a2 = np.abs
    integrand = (
        a2(f) ** 2
        + a2(fp) ** 2 + l * (l + 1) * a2(f) ** 2 / r ** 2
        + a2(g1p) ** 2 + (l + 1) * (l + 2) * a2(g1) ** 2 / r ** 2
        + a2(g2p) ** 2 + (l - 1) * l * a2(g2) ** 2 / r ** 2
    )
    return float(np.real(w @ (r * r * integrand)))


def _radial_rule(R, n=N_RADIAL_QUAD):
    x, w = gauss_legendre(n)
    return 0.5 * R * (x + 1.0), 0.5 * R * w


@lru_cache(maxsize=256)
def extension_h2_sq(R, l_max, n=N_RADIAL_QUAD):
    """||i_l(r)/i_l(R) Y_lm||_{H^2(ball)}^2 for l = 0..l_max (independent of m)."""
    r, w = _radial_rule(R, n)
    f, fp = _ratio_profiles(l_max, r, R)
    out = np.empty(l_max + 1)
    for l in range(l_max + 1):
        # i_l solves f'' + 2 f'/r - (l(l+1)/r^2 + 1) f = 0
        fpp = -2.0 * fp[:, l] / r + (l * (l + 1) / r ** 2 + 1.0) * f[:, l]
        out[l] = mode_h2_norm_sq(l, r, w, f[:, l], fp[:, l], fpp)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------- ball functions

@dataclass
class BallFunction:
    """Function on the ball |x| < R, sum_lm f_lm(r) Y_lm.

    ``kind="modified-bessel"``: f_lm = a_lm i_l(r)/i_l(R).
    ``kind="power-pair"``: f_lm = a_lm (r/R)^l + b_lm (r/R)^(l+2).
    """

    R: float
    kind: str
    a: np.ndarray
    b: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("modified-bessel", "power-pair"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        self.a = np.asarray(self.a, dtype=np.complex128)
        if self.b is None:
            self.b = np.zeros_like(self.a)
        self.b = np.asarray(self.b, dtype=np.complex128)

    @property
    def l_max(self):
        return _lmax_of(self.a.size)

    def profiles(self, r):
        """Values, first and second radial derivatives of every f_lm at radii r; each (npts, n_lm)."""
        r = np.atleast_1d(np.asarray(r, dtype=np.float64))
        ls, _ = lm_arrays(self.l_max)
        if self.kind == "modified-bessel":
            f, fp = _ratio_profiles(self.l_max, r, self.R)
            safe = np.where(r > 0, r, 1.0)[:, None]
            lsl = np.arange(self.l_max + 1)
            fpp = -2.0 * fp / safe + (lsl * (lsl + 1) / safe ** 2 + 1.0) * f
            return f[:, ls] * self.a, fp[:, ls] * self.a, fpp[:, ls] * self.a
        p0, p2 = _power_profiles(self.l_max, r, self.R)
        return tuple(u[:, ls] * self.a + v[:, ls] * self.b for u, v in zip(p0, p2))

    def trace(self):
        f, _, _ = self.profiles(np.array([self.R]))
        return SphereFunction(self.R, f[0])

    def normal_trace(self):
        """Inward normal derivative -d/dr on the boundary."""
        _, fp, _ = self.profiles(np.array([self.R]))
        return SphereFunction(self.R, -fp[0])

    def T1(self):
        return self.trace(), self.normal_trace()

    def evaluate(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        r = np.linalg.norm(x, axis=1)
        if np.any(r > self.R * (1 + 1e-12)):
            raise ValueError("point outside the ball")
        unit = np.where(r[:, None] > 0, x / np.where(r > 0, r, 1.0)[:, None], [0.0, 0.0, 1.0])
        f, _, _ = self.profiles(np.maximum(r, 1e-300))
        return np.sum(spherical_harmonics_at(self.l_max, unit) * f, axis=1)

    def h2_norm(self, n=N_RADIAL_QUAD):
        if self.kind == "modified-bessel":
            per_l = extension_h2_sq(float(self.R), self.l_max, n)
            ls, _ = lm_arrays(self.l_max)
            return float(math.sqrt(np.sum(per_l[ls] * np.abs(self.a) ** 2)))
        r, w = _radial_rule(self.R, n)
        f, fp, fpp = self.profiles(r)
        ls, _ = lm_arrays(self.l_max)
        total = sum(mode_h2_norm_sq(int(ls[j]), r, w, f[:, j], fp[:, j], fpp[:, j]) for j in range(ls.size))
        return math.sqrt(total)


def orthocomplement_extension(g):
    """The (-Laplacian + 1)-harmonic function on the ball whose trace is g."""
    return BallFunction(g.R, "modified-bessel", g.coeffs.copy())


def h2_bound_constant(R, l_eval):
    """Best constant of ||u||_{H^2(ball)} <= C ||u|_{sphere}||_{H^{3/2}} over single modes l <= l_eval.

    Returns ``(C, ratios)`` with ``ratios[l]`` the per-degree ratio.
    """
    if l_eval > 100 or l_eval < 0:
        raise ValueError("l_eval must lie in [0, 100]")
    sq = extension_h2_sq(float(R), int(l_eval))
    ls = np.arange(l_eval + 1)
    denom = R * (1.0 + ls * (ls + 1) / R ** 2) ** 0.75
    ratios = np.sqrt(sq) / denom
    return float(np.max(ratios)), ratios


def trace_right_inverse_Z1(g0, g1):
    """Ball function with boundary value g0 and inward normal derivative g1.

    Per mode the profile is a (r/R)^l + b (r/R)^(l+2) with a + b = g0 and
    -(l a + (l+2) b)/R = g1.
    """
    if abs(g0.R - g1.R) > 1e-14 * g0.R:
        raise ValueError("g0 and g1 must live on the same sphere")
    l = max(g0.l_eval, g1.l_eval)
    c0 = g0.padded(l).coeffs
    c1 = g1.padded(l).coeffs
    ls, _ = lm_arrays(l)
    b = (-g0.R * c1 - ls * c0) / 2.0
    return BallFunction(g0.R, "power-pair", c0 - b, b)


def J(g0, g1):
    """Flip the sign of the first normal derivative (orientation change of the normal)."""
    return g0, g1 * -1.0


# ---------------------------------------------------------------- layered decomposition

@dataclass
class LayeredPiece:
    """Radially symmetric function on the hole-filled region of layer ``index``.

    Regions are numbered outermost first; ``pieces[j]`` is the polynomial on
    region ``index + j``.
    """

    index: int
    radii: tuple
    pieces: list = field(default_factory=list)

    def region_of(self, r):
        """Region number of each radius (0 = outermost)."""
        edges = np.asarray(self.radii)
        return len(edges) - np.searchsorted(edges, np.asarray(r), side="left")

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        reg = self.region_of(r)
        out = np.zeros(r.shape)
        for j, p in enumerate(self.pieces):
            sel = reg == self.index + j
            if np.any(sel):
                out[sel] = p(r[sel])
        return out


def _as_poly(f):
    if isinstance(f, Polynomial):
        return f
    if np.isscalar(f):
        return Polynomial([float(f)])
    return Polynomial(np.asarray(f, dtype=np.float64))


def _fill_hole(p, rho):
    """Z1 J T1 for a radial function on the hole |x| < rho: C^1 match with c0 + c2 r^2."""
    value = p(rho)
    slope = p.deriv()(rho)
    g0 = SphereFunction(rho, [value])
    g1 = SphereFunction(rho, [slope])  # inward normal of the outer region is +d/dr
    h0, h1 = J(g0, g1)
    ball = trace_right_inverse_Z1(h0, h1)
    a = ball.a[0].real
    b = ball.b[0].real
    return Polynomial([a, 0.0, b / rho ** 2])


def layered_decomposition(shell_values, radii, centers=None):
    """Split a tuple of radial functions on concentric shells into hole-filled pieces v_alpha.

    ``shell_values`` lists the data outermost first (scalars, coefficient
    arrays or numpy Polynomials in r); ``radii`` are the interface radii in
    increasing order, one fewer than the regions. Returns the pieces
    v_1..v_N with sum v_alpha equal to the input on every region.
    """
    if centers is not None:
        c = np.atleast_2d(np.asarray(centers, dtype=np.float64))
        if np.any(np.abs(c - c[0]) > 1e-12):
            raise GeometryUnsupported("layered decomposition requires concentric regions")
    radii = tuple(float(x) for x in radii)
    if len(shell_values) != len(radii) + 1:
        raise ValueError("need one interface radius fewer than regions")
    if any(b <= a for a, b in zip(radii, radii[1:])) or (radii and radii[0] <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    N = len(shell_values)
    work = [_as_poly(f) for f in shell_values]
    inner_radius = list(reversed(radii))  # region j (outermost first) has its hole below inner_radius[j]
    out = []
    for alpha in range(N):
        current = work[alpha]
        pieces = [current]
        if alpha < N - 1:
            fill = _fill_hole(current, inner_radius[alpha])
            pieces.extend([fill] * (N - 1 - alpha))
            for beta in range(alpha + 1, N):
                work[beta] = work[beta] - fill
        out.append(LayeredPiece(alpha, radii, pieces))
    return out


def reassemble(pieces, r):
    """Sum of the pieces at radii r."""
    total = np.zeros(np.shape(r))
    for p in pieces:
        total = total + p(r)
    return total


# ---------------------------------------------------------------- continuous surrogate

@dataclass
class Surrogate:
    """Psi = u - Phi: the input field with each sphere interior corrected by the extension of its jump."""

    field: object
    corrections: list
    l_eval: int

    def jump(self, alpha):
        """Exterior minus corrected interior trace on sphere alpha."""
        g = self.field.jump(alpha, self.l_eval).coeffs
        return g - self.corrections[alpha].trace().padded(self.l_eval).coeffs

    def evaluate(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = self.field.evaluate(x)
        geom = self.field.geometry
        where = geom.locate(x)
        for a, ext in enumerate(self.corrections):
            sel = where == a
            if np.any(sel):
                out[sel] += ext.evaluate(x[sel] - geom.centers[a])
        return out


def jump_norms(u, l_eval, s=1.5):
    """Per-sphere H^s norms of the trace jumps of a piecewise field, with the Rayleigh tail bound added."""
    geom = u.geometry
    out = []
    for a in range(geom.n_spheres):
        jmp = u.jump(a, l_eval)
        g = SphereFunction(jmp.R, jmp.coeffs)
        norm = boundary_sobolev_norm(g, s)
        w_tail = (1.0 + (l_eval + 1) * (l_eval + 2) / jmp.R ** 2) ** s
        out.append(norm + jmp.R * math.sqrt(jmp.tail_sq * w_tail) if jmp.tail_sq else norm)
    return np.array(out)


def continuous_surrogate(u, geom=None, l_eval=None):
    """Zero-jump surrogate of a piecewise field and an upper bound for its distance to the continuous subspace.

    On each sphere the jump g (exterior minus interior trace) is extended into
    the ball by ``orthocomplement_extension`` and added to the interior. The
    broken H^2 norm of these extensions bounds dist(u, Y) from above. Only the
    value trace has to match because Y requires H^1 continuity.
    """
    geom = u.geometry if geom is None else geom
    if l_eval is None:
        l_max = max([len(rad) - 1 for terms in u.interiors for rad, _ in terms] or [0])
        l_eval = l_max + 12
    corrections = []
    dist_sq = 0.0
    for a in range(geom.n_spheres):
        jmp = u.jump(a, l_eval)
        ext = orthocomplement_extension(SphereFunction(jmp.R, jmp.coeffs))
        corrections.append(ext)
        dist_sq += ext.h2_norm() ** 2
    return Surrogate(u, corrections, l_eval), math.sqrt(dist_sq)
