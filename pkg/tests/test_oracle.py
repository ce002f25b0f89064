import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ksdminimax import (InputError, ksd_gaussian_closed_form, ksd_quadrature, ksd_squared_quadrature,
                        lemma2_integrand, minimax_separation, QuadratureConfig)
from ksdminimax.oracle import ksd_squared_gaussian_closed_form, truncation_radius


def test_closed_form_examples():
    assert ksd_gaussian_closed_form(1.0, 1, [1.0]) == pytest.approx(5 ** -0.25, rel=1e-15)
    assert ksd_gaussian_closed_form(1.0, 3, np.zeros(3), None) == 0.0
    k2 = ksd_squared_gaussian_closed_form(0.25, 1, [0.0], 2.0)
    assert k2 == pytest.approx(1 / (6 * math.sqrt(3)), rel=1e-14)
    assert math.sqrt(k2) == pytest.approx(0.3102015, abs=1e-6)


def test_integrand_examples():
    w = np.random.default_rng(0).normal(size=(5, 2))
    np.testing.assert_array_equal(lemma2_integrand([0.0, 0.0], None, w), np.zeros(5))
    assert lemma2_integrand([1.0], 1.0, [0.0]) == 1.0
    assert lemma2_integrand([0.0], 2.0, [1.0]) == pytest.approx(math.exp(-2), rel=1e-15)


def test_quadrature_examples():
    assert ksd_quadrature(1.0, 1, [0.5], 1.0) == pytest.approx(ksd_gaussian_closed_form(1.0, 1, [0.5]), abs=1e-8)
    res = ksd_squared_quadrature(1.0, 1, [0.0], None, QuadratureConfig(abs_tol=1e-10))
    assert abs(res.value) <= 1e-10
    assert ksd_quadrature(0.25, 1, [0.0], 2.0) == pytest.approx(0.3102015, abs=1e-6)


GRID = list(itertools.product([0.25, 1.0, 4.0], [0.0, 0.5, 2.0], [0.5, 1.0, 2.0]))


@pytest.mark.parametrize("gamma,mu,sigma", GRID)
def test_quadrature_agrees_with_closed_form(gamma, mu, sigma):
    q = ksd_quadrature(gamma, 1, [mu], sigma)
    c = ksd_gaussian_closed_form(gamma, 1, [mu], sigma)
    assert abs(q - c) <= 1e-6


@pytest.mark.parametrize("d", [2, 3])
def test_quadrature_general_covariance(rng, d):
    """The general-covariance closed form against cubature in more than one dimension."""
    A = rng.normal(size=(d, d))
    cov = A @ A.T / d + 0.5 * np.eye(d)
    mu = rng.normal(size=d)
    res = ksd_squared_quadrature(0.7, d, mu, cov, QuadratureConfig(abs_tol=1e-9, max_subdivisions=20000))
    exact = ksd_squared_gaussian_closed_form(0.7, d, mu, cov)
    assert abs(res.value - exact) <= res.error


def test_truncation_radius_guard():
    auto = truncation_radius(1.0, 1, [1.0], None, 1e-11)
    with pytest.raises(InputError):
        ksd_squared_quadrature(1.0, 1, [1.0], None, QuadratureConfig(truncation_radius=0.5 * auto))
    with pytest.raises(InputError):
        ksd_squared_quadrature(1.0, 4, np.zeros(4))


def test_separation_examples():
    assert minimax_separation(100, 1.0, 1) == pytest.approx(0.0334370, abs=1e-7)
    assert minimax_separation(100, 1.0, 1) == pytest.approx(5 ** -0.25 / 20, rel=1e-15)
    assert minimax_separation(1, 1e-300, 3) == pytest.approx(0.5, rel=1e-12)
    assert minimax_separation(1, 1.0, 10) == pytest.approx(5 ** -2.5 / 2, rel=1e-15)
    assert minimax_separation(1, 1.0, 10) == pytest.approx(0.0089443, abs=1e-7)
    with pytest.raises(InputError):
        minimax_separation(1, 0.0, 1)


vectors = st.integers(1, 6).flatmap(lambda d: arrays(float, d, elements=st.floats(-5, 5)))


@given(vectors, st.floats(0.01, 10), st.floats(0, 20))
def test_shift_scaling(mu, gamma, t):
    d = mu.size
    a = ksd_gaussian_closed_form(gamma, d, t * mu)
    b = t * ksd_gaussian_closed_form(gamma, d, mu)
    assert a == pytest.approx(b, rel=1e-13, abs=1e-300)


@given(vectors, st.floats(0.01, 10))
def test_identity_reduction(mu, gamma):
    d = mu.size
    s = float(np.abs(mu).max())
    norm = s * float(np.sqrt(np.sum((mu / s) ** 2))) if s > 0 else 0.0  # rescaled, no underflow
    expected = norm * (4 * gamma + 1) ** (-d / 4)
    assert ksd_gaussian_closed_form(gamma, d, mu, np.eye(d)) == pytest.approx(expected, rel=1e-14, abs=1e-300)
    # the general-covariance route, fed the identity via a tiny detour, agrees too
    near = ksd_squared_gaussian_closed_form(gamma, d, mu, np.eye(d) * (1 + 1e-15))
    assert near == pytest.approx(expected**2, rel=1e-12, abs=1e-20)


def test_tiny_shift_does_not_underflow():
    assert ksd_gaussian_closed_form(1.0, 2, [3e-200, 4e-200]) == pytest.approx(5e-200 * 25 ** -0.25, rel=1e-15)


@given(vectors, st.floats(0.05, 5), st.floats(0.2, 3))
def test_closed_form_non_negative(mu, gamma, s):
    d = mu.size
    v = ksd_gaussian_closed_form(gamma, d, mu, s)
    assert v >= 0
    if s != 1.0 or np.any(mu):
        assert v > 0
