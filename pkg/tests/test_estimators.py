import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ksdminimax import (GaussianMeasure, InputError, KernelSpec, Method, SampleSet, ksd_nystrom,
                        ksd_v_statistic, ksd_v_statistic_samples, psd_pseudo_solve, sample_landmarks,
                        stein_gram)
from ksdminimax.stein import SteinGram

T1 = GaussianMeasure.standard(1)
K1 = KernelSpec(1.0, 1)


def test_v_statistic_examples():
    r = ksd_v_statistic(SteinGram(np.array([[2.0]])))
    assert r.ksd_squared == 2.0 and r.ksd == pytest.approx(1.4142136, abs=1e-7)
    off = -4 * math.exp(-1)
    r = ksd_v_statistic(SteinGram(np.array([[2.0, off], [off, 3.0]])))
    assert r.ksd_squared == pytest.approx(0.5142411, abs=1e-7)
    r2 = ksd_v_statistic_samples(T1, K1, np.array([[0.0], [1.0]]))
    assert r2.ksd_squared == pytest.approx(r.ksd_squared, rel=1e-14)


def test_v_statistic_streaming_matches_gram(rng):
    t = GaussianMeasure(np.array([0.1, -0.2]), np.array([[1.2, 0.2], [0.2, 0.9]]))
    spec = KernelSpec(0.5, 2)
    X = rng.normal(size=(333, 2))
    a = ksd_v_statistic(stein_gram(t, spec, X)).ksd_squared
    b = ksd_v_statistic_samples(t, spec, X).ksd_squared
    assert b == pytest.approx(a, rel=1e-12)


def test_calibration_under_target():
    """Samples from the target itself: the estimate stays near zero."""
    hits = 0
    runs = 40
    for r in range(runs):
        X = np.random.default_rng(1000 + r).standard_normal((4096, 1))
        ksd = ksd_v_statistic_samples(T1, K1, X).ksd
        hits += 0.0 <= ksd <= 0.15
    assert hits / runs >= 0.95


def test_landmark_examples():
    rng = np.random.default_rng(0)
    assert np.array_equal(sample_landmarks(1, 5, rng), np.zeros(5, dtype=int))
    a = sample_landmarks(100, 30, np.random.default_rng(7))
    b = sample_landmarks(100, 30, np.random.default_rng(7))
    assert np.array_equal(a, b)
    with pytest.raises(InputError):
        sample_landmarks(10, 0, rng)


def test_landmark_distinct_fraction():
    rng = np.random.default_rng(42)
    n = m = 10_000
    expected = 1 - (1 - 1 / n) ** m
    assert expected == pytest.approx(1 - 1 / math.e, abs=1e-4)
    fracs = np.array([np.unique(sample_landmarks(n, m, rng)).size / n for _ in range(100)])
    assert np.all(np.abs(fracs - expected) <= 0.02)


def test_pseudo_solve_examples():
    np.testing.assert_allclose(psd_pseudo_solve(np.eye(2), [1.0, 2.0]), [1, 2], rtol=1e-15)
    np.testing.assert_allclose(psd_pseudo_solve(np.ones((2, 2)), [1.0, 1.0]), [0.5, 0.5], rtol=1e-14)
    np.testing.assert_array_equal(psd_pseudo_solve(np.zeros((3, 3)), [1.0, -2.0, 3.0]), np.zeros(3))
    with pytest.raises(InputError):
        psd_pseudo_solve(np.array([[1.0, 2.0], [0.0, 1.0]]), [1.0, 1.0])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_pseudo_solve_matches_pinv(n, r, seed):
    g = np.random.default_rng(seed)
    B = g.normal(size=(n, min(r, n)))
    A = B @ B.T
    b = g.normal(size=n)
    ref = np.linalg.pinv(A, rcond=1e-10, hermitian=True) @ b
    np.testing.assert_allclose(psd_pseudo_solve(A, b), ref, rtol=1e-6, atol=1e-8 * (1 + np.abs(ref).max()))


def test_nystrom_full_coverage_equals_v_statistic(rng):
    X = rng.normal(0.4, 1.2, size=(64, 1))
    v = ksd_v_statistic_samples(T1, K1, X).ksd_squared
    ny = ksd_nystrom(T1, K1, X, m=64, landmarks=np.arange(64)).ksd_squared
    assert ny == pytest.approx(v, rel=1e-8)


def test_nystrom_single_point():
    X = np.array([[0.7]])
    ny = ksd_nystrom(T1, K1, X, m=1, rng=np.random.default_rng(3))
    assert ny.ksd_squared == pytest.approx(ksd_v_statistic_samples(T1, K1, X).ksd_squared, rel=1e-14)
    assert ny.method is Method.NYSTROM and ny.landmarks_used == 1


def test_nystrom_deterministic(rng):
    X = rng.normal(size=(500, 2))
    t, spec = GaussianMeasure.standard(2), KernelSpec(1.0, 2)
    a = ksd_nystrom(t, spec, X, 23, np.random.default_rng(5))
    b = ksd_nystrom(t, spec, X, 23, np.random.default_rng(5))
    assert a == b
    with pytest.raises(InputError):
        ksd_nystrom(t, spec, X, 23)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 80), st.integers(1, 3), st.integers(1, 40), st.floats(0.1, 4.0),
       st.integers(0, 2**32 - 1))
def test_nystrom_never_exceeds_v_statistic(n, d, m, gamma, seed):
    g = np.random.default_rng(seed)
    X = g.normal(0.3, 1.5, size=(n, d))
    t, spec = GaussianMeasure.standard(d), KernelSpec(gamma, d)
    v = ksd_v_statistic_samples(t, spec, X).ksd_squared
    ny = ksd_nystrom(t, spec, X, m, g).ksd_squared
    assert ny <= v + 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_permutation_invariance(n, m, seed):
    g = np.random.default_rng(seed)
    X = g.normal(0.5, 1.0, size=(n, 2))
    t, spec = GaussianMeasure.standard(2), KernelSpec(0.8, 2)
    perm = g.permutation(n)
    inv = np.argsort(perm)
    v = ksd_v_statistic_samples(t, spec, X).ksd_squared
    vp = ksd_v_statistic_samples(t, spec, X[perm]).ksd_squared
    assert vp == pytest.approx(v, rel=1e-12, abs=1e-15)
    idx = g.integers(0, n, size=m)
    ny = ksd_nystrom(t, spec, X, m, landmarks=idx).ksd_squared
    nyp = ksd_nystrom(t, spec, X[perm], m, landmarks=inv[idx]).ksd_squared
    assert nyp == pytest.approx(ny, rel=1e-9, abs=1e-12)


def test_sample_set_validation():
    with pytest.raises(InputError):
        SampleSet(np.empty((0, 2)))
    with pytest.raises(InputError):
        SampleSet(np.array([[0.0, np.nan]]))
    assert SampleSet([1.0, 2.0]).dim == 1
    assert Method.parse("v") is Method.V_STATISTIC
    with pytest.raises(InputError):
        Method.parse("u")
