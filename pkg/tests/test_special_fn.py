import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from apwcert import special_fn as sf


@pytest.mark.parametrize("l", [0, 1, 2, 7, 30, 120])
@pytest.mark.parametrize("x", [1e-6, 0.5, 3.7, 25.0, 99.0])
def test_spherical_bessel_j_matches_mpmath(l, x):
    ref = float(mpmath.sqrt(mpmath.pi / (2 * mpmath.mpf(x))) * mpmath.besselj(l + 0.5, x))
    got = sf.spherical_bessel_j(l, x)
    assert got == pytest.approx(ref, rel=1e-11, abs=1e-300)


def test_spherical_bessel_j_at_zero():
    j = sf.spherical_bessel_j_all(5, 0.0)
    assert j[0] == 1.0 and np.all(j[1:] == 0.0)


@pytest.mark.parametrize("l", [0, 3, 10, 60])
@pytest.mark.parametrize("x", [0.01, 1.0, 12.0, 45.0])
def test_modified_bessel_matches_mpmath(l, x):
    ref = mpmath.sqrt(mpmath.pi / (2 * mpmath.mpf(x))) * mpmath.besseli(l + 0.5, x)
    mant, log_scale = sf.modified_spherical_bessel_i_scaled(l, x)
    got = mpmath.mpf(mant) * mpmath.exp(log_scale)
    assert float(got / ref) == pytest.approx(1.0, rel=1e-11)


def test_modified_bessel_scaled_representation_for_large_x():
    mant, log_scale = sf.modified_spherical_bessel_i_scaled(2, 900.0)
    assert log_scale == 900.0
    ref = mpmath.sqrt(mpmath.pi / 1800) * mpmath.besseli(2.5, 900) * mpmath.exp(-900)
    assert mant == pytest.approx(float(ref), rel=1e-11)


def test_l0_closed_forms():
    x = 2.3
    assert sf.spherical_bessel_j(0, x) == pytest.approx(math.sin(x) / x, rel=1e-14)
    assert sf.modified_spherical_bessel_i(0, x) == pytest.approx(math.sinh(x) / x, rel=1e-14)


def test_j_derivative_against_finite_difference():
    x, h = 4.2, 1e-6
    d = sf.spherical_bessel_j_deriv_all(10, x)
    fd = (sf.spherical_bessel_j_all(10, x + h) - sf.spherical_bessel_j_all(10, x - h)) / (2 * h)
    np.testing.assert_allclose(d, fd, atol=1e-9)


def test_spherical_harmonics_match_scipy(rng):
    theta = rng.uniform(0, math.pi, 20)
    phi = rng.uniform(0, 2 * math.pi, 20)
    Y = sf.spherical_harmonics_all(12, theta, phi)
    for l in range(13):
        for m in range(-l, l + 1):
            ref = special.sph_harm_y(l, m, theta, phi)
            np.testing.assert_allclose(Y[:, sf.lm_index(l, m)], ref, atol=1e-13)


def test_y21_closed_form():
    th, ph = 0.7, 1.9
    ref = -math.sqrt(15 / (8 * math.pi)) * math.sin(th) * math.cos(th) * np.exp(1j * ph)
    assert sf.spherical_harmonic(2, 1, th, ph) == pytest.approx(ref, abs=1e-15)


@given(st.integers(0, 40), st.floats(0.0, math.pi), st.floats(0.0, 2 * math.pi))
def test_harmonic_conjugation_symmetry(l, th, ph):
    Y = sf.spherical_harmonics_all(l, th, ph)[0]
    for m in range(1, l + 1):
        assert Y[sf.lm_index(l, -m)] == pytest.approx((-1) ** m * np.conj(Y[sf.lm_index(l, m)]), abs=1e-12)


@given(st.integers(0, 60), st.floats(0.0, math.pi), st.floats(0.0, 2 * math.pi))
def test_addition_theorem(l, th, ph):
    # sum_m |Y_lm|^2 = (2l+1)/(4 pi)
    Y = sf.spherical_harmonics_all(l, th, ph)[0]
    s = np.sum(np.abs(Y[l * l:(l + 1) ** 2]) ** 2)
    assert s == pytest.approx((2 * l + 1) / (4 * math.pi), rel=1e-12)


@pytest.mark.parametrize("order", [0, 4, 10, 20])
def test_sphere_quadrature_orthonormality(order):
    q = sf.build_sphere_quadrature(order)
    lmax = order // 2
    Y = q.ylm(lmax)
    gram = np.conj(Y).T @ (q.weights[:, None] * Y)
    np.testing.assert_allclose(gram, np.eye(gram.shape[0]), atol=1e-13)
    assert np.sum(q.weights) == pytest.approx(4 * math.pi, rel=1e-14)


def test_quadrature_projection_recovers_coefficients(rng):
    q = sf.build_sphere_quadrature(16)
    c = rng.normal(size=sf.n_lm(8)) + 1j * rng.normal(size=sf.n_lm(8))
    vals = q.ylm(8) @ c
    np.testing.assert_allclose(q.project(vals, 8), c, atol=1e-12)


def test_quadrature_order_validation():
    with pytest.raises(ValueError):
        sf.build_sphere_quadrature(101)


def test_lm_arrays_layout():
    ls, ms = sf.lm_arrays(3)
    assert ls.size == 16
    for idx, (l, m) in enumerate(zip(ls, ms)):
        assert sf.lm_index(l, m) == idx
