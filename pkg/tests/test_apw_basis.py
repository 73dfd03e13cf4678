import math

import numpy as np
import pytest

from apwcert import special_fn as sf
from apwcert.apw_basis import (
    MuffinTinGeometry,
    PiecewiseField,
    boundary_jump,
    evaluate_apw,
    make_apw,
    rayleigh_coefficients,
    rayleigh_tail_sq,
    reciprocal_vectors,
    shortest_reciprocal_vectors,
)
from apwcert.errors import GeometryError, IncompatibleBasis, OutOfCell, RadialNodeAtR, ValidationError
from apwcert.radial import RadialPotential


def test_geometry_rejects_overlapping_spheres():
    with pytest.raises(GeometryError) as info:
        MuffinTinGeometry.cubic(10.0, [[3, 5, 5], [6, 5, 5]], [2.0, 2.0])
    assert "(A')" in str(info.value)
    assert isinstance(info.value, ValidationError)


def test_geometry_rejects_sphere_touching_cell_face():
    with pytest.raises(GeometryError):
        MuffinTinGeometry.cubic(4.0, [[1.0, 2.0, 2.0]], [1.0])


def test_geometry_rejects_degenerate_cell():
    with pytest.raises(GeometryError):
        MuffinTinGeometry(np.array([[1.0, 0, 0], [2.0, 0, 0], [0, 0, 1.0]]))


def test_reciprocal_lattice_duality(cube):
    b = cube.reciprocal
    np.testing.assert_allclose(cube.cell @ b.T, 2 * math.pi * np.eye(3), atol=1e-12)


def test_reciprocal_vectors_sorted_and_complete(cube):
    G = reciprocal_vectors(cube, 1)
    assert G.shape == (27, 3)
    n = np.linalg.norm(G, axis=1)
    assert np.all(np.diff(n) >= -1e-12)
    assert np.sum(np.isclose(n, 1.0)) == 6


def test_shortest_reciprocal_vectors_brute_force(cube, rng):
    k = rng.uniform(-0.5, 0.5, 3)
    G = shortest_reciprocal_vectors(cube, 10, k)
    allG = reciprocal_vectors(cube, 4)
    ref = np.sort(np.linalg.norm(k + allG, axis=1))[:10]
    np.testing.assert_allclose(np.sort(np.linalg.norm(k + G, axis=1)), ref, atol=1e-12)


def test_rayleigh_expansion_reproduces_plane_wave(rng):
    q = rng.normal(size=3)
    c = rng.normal(size=3)
    R = 1.2
    coeffs = rayleigh_coefficients(q, c, R, 30)
    quad = sf.build_sphere_quadrature(20)
    pts = quad.points(R, c)
    vals = quad.ylm(30) @ coeffs
    np.testing.assert_allclose(vals, np.exp(1j * pts @ q), atol=1e-12)


def test_rayleigh_tail_matches_partial_sum_identity():
    # sum_l (2l+1) j_l(x)^2 = 1
    x, L = 2.5, 12
    j = sf.spherical_bessel_j_all(L, x)
    head = 4 * math.pi * np.sum((2 * np.arange(L + 1) + 1) * j ** 2)
    assert head + rayleigh_tail_sq(x, L) == pytest.approx(4 * math.pi, rel=1e-13)


def test_free_apw_is_plane_wave_inside(cube):
    k = np.array([0.1, 0.2, -0.3])
    G = reciprocal_vectors(cube, 1)[3]
    q = k + G
    f = make_apw(cube, RadialPotential.zero(), k, G, float(q @ q), 20)
    rng = np.random.default_rng(1)
    d = rng.normal(size=(200, 3))
    pts = cube.centers[0] + 1.4 * d / np.linalg.norm(d, axis=1)[:, None] * rng.uniform(0, 1, (200, 1))
    np.testing.assert_allclose(evaluate_apw(f, pts), np.exp(1j * pts @ q), atol=1e-9)


def test_jump_vanishes_up_to_l_max(cube):
    k = np.array([0.0, 0.1, 0.2])
    G = reciprocal_vectors(cube, 1)[1]
    f = make_apw(cube, RadialPotential.well(1.0), k, G, 0.3, 6)
    jmp = boundary_jump(f, 0)
    assert np.max(np.abs(jmp.coeffs[: sf.n_lm(6)])) < 1e-13
    assert np.max(np.abs(jmp.coeffs[sf.n_lm(6):])) > 1e-6
    assert jmp.tail_sq < 1e-60


def test_jump_l2_norm_against_trace_quadrature(cube):
    k = np.array([0.05, 0.0, 0.1])
    G = reciprocal_vectors(cube, 1)[2]
    f = make_apw(cube, RadialPotential.well(1.0), k, G, 0.3, 3)
    jmp = boundary_jump(f, 0, l_eval=40)
    quad = sf.build_sphere_quadrature(60)
    pts = quad.points(1.5, cube.centers[0])
    fld = f.to_field()
    diff = fld.evaluate_exterior(pts) - fld.evaluate_interior(0, pts)
    l2_quad = math.sqrt(quad.integrate(np.abs(diff) ** 2, 1.5))
    l2_coef = 1.5 * math.sqrt(np.sum(np.abs(jmp.coeffs) ** 2))
    assert l2_quad == pytest.approx(l2_coef, rel=1e-10)


def test_evaluate_outside_cell_raises(cube):
    f = make_apw(cube, RadialPotential.zero(), np.zeros(3), np.zeros(3), 0.5, 2)
    with pytest.raises(OutOfCell):
        evaluate_apw(f, [10.0, 0.0, 0.0])


def test_radial_node_surfaces_as_error(cube):
    # chi_0 = sin(sqrt(E) r) vanishes at r = R when sqrt(E) R = pi
    E = (math.pi / 1.5) ** 2
    try:
        make_apw(cube, RadialPotential.zero(), np.zeros(3), np.zeros(3), E, 0, n_grid=1000)
    except RadialNodeAtR as exc:
        assert exc.l == 0
    else:
        # the discrete solution may miss the node; then the matching coefficient must be huge
        f = make_apw(cube, RadialPotential.zero(), np.zeros(3), np.zeros(3), E, 0)
        assert abs(f.coeffs[0][0]) > 1e6


def test_combining_fields_requires_common_k(cube):
    a = make_apw(cube, RadialPotential.zero(), np.zeros(3), np.zeros(3), 0.5, 2).to_field()
    b = make_apw(cube, RadialPotential.zero(), np.array([0.1, 0, 0]), np.zeros(3), 0.5, 2).to_field()
    with pytest.raises(IncompatibleBasis):
        a + b


def test_field_linearity(cube):
    k = np.array([0.1, 0.0, 0.0])
    G = reciprocal_vectors(cube, 1)
    f1 = make_apw(cube, RadialPotential.well(1.0), k, G[0], 0.2, 4).to_field()
    f2 = make_apw(cube, RadialPotential.well(1.0), k, G[1], 0.2, 4).to_field()
    comb = PiecewiseField.combine([f1, f2], [2.0, -1j])
    pts = np.array([[math.pi, math.pi, math.pi + 0.7], [0.5, 0.5, 0.5]])
    np.testing.assert_allclose(comb.evaluate(pts), 2.0 * f1.evaluate(pts) - 1j * f2.evaluate(pts), atol=1e-13)
    np.testing.assert_allclose(comb.jump(0, 10).coeffs, 2.0 * f1.jump(0, 10).coeffs - 1j * f2.jump(0, 10).coeffs,
                               atol=1e-13)
