import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nuar.convseries import (
    GeometricSumSampler,
    SeriesError,
    explicit_series,
    geosum_pmf,
    psi_cdf,
    psi_sequence,
    sample_geosum,
)
from nuar.kernel import finite_kernel, geometric_kernel, power_law_kernel


def test_ar1_psi():
    psi = psi_sequence(finite_kernel([1]), 0.9, 3)
    np.testing.assert_allclose(psi.values, [1, 0.9, 0.81, 0.729], rtol=1e-15)


def test_psi2_matches_explicit_series():
    k = finite_kernel([1, 1])
    psi = psi_sequence(k, 0.9, 5)
    oracle = explicit_series(np.array(k.weights), 0.9, 5, 20)
    assert oracle[2] == pytest.approx(0.6525, abs=1e-15)
    assert psi.values[2] == pytest.approx(0.6525, abs=1e-15)


@pytest.mark.parametrize("k", [geometric_kernel(0.5), finite_kernel([1, 3]), power_law_kernel(0.6)])
def test_total_mass_at_half(k):
    psi = psi_sequence(k, 0.5, 10_000)
    total = psi.partial_sums[-1]
    assert total <= 2.0 + 1e-12
    if k.light_tail:
        assert total == pytest.approx(2.0, abs=1e-10)


def test_psi_cdf_examples():
    psi = psi_sequence(finite_kernel([1]), 0.9, 10)
    assert psi_cdf(psi, 10, 0.0) == pytest.approx(0.1)
    assert psi_cdf(psi, 10, 0.2) == pytest.approx(0.271, abs=1e-15)
    with pytest.raises(SeriesError):
        psi_cdf(psi, 100, 0.5)


def test_geosum_pmf_examples():
    psi = psi_sequence(finite_kernel([1]), 0.9, 20)
    assert geosum_pmf(psi, 0) == pytest.approx(0.1)
    np.testing.assert_allclose(geosum_pmf(psi, np.arange(21)), 0.1 * 0.9 ** np.arange(21), rtol=1e-13)
    with pytest.raises(SeriesError):
        geosum_pmf(psi, 21)


@pytest.mark.parametrize("a", [0.0, 1.0, -0.1])
def test_rejects_bad_a(a):
    with pytest.raises(SeriesError):
        psi_sequence(geometric_kernel(0.5), a, 10)
    with pytest.raises(SeriesError):
        GeometricSumSampler(geometric_kernel(0.5), a)


small_kernels = st.one_of(
    st.builds(geometric_kernel, st.floats(0, 0.9)),
    st.builds(finite_kernel, st.lists(st.floats(0, 5), min_size=1, max_size=6).filter(lambda w: sum(w) > 1e-3)),
    st.builds(power_law_kernel, st.floats(0.1, 0.9)),
)


@given(small_kernels, st.floats(0.05, 0.95), st.integers(1, 50))
@settings(max_examples=60, deadline=None)
def test_recursion_equals_brute_force(k, a, L):
    psi = psi_sequence(k, a, L)
    phi, _ = k.coeffs(L)
    oracle = explicit_series(phi, a, L, 200)
    np.testing.assert_allclose(psi.values, oracle, rtol=1e-10, atol=1e-12)


@given(small_kernels, st.floats(0.05, 0.999), st.integers(1, 2000))
@settings(max_examples=60, deadline=None)
def test_psi_invariants(k, a, L):
    psi = psi_sequence(k, a, L)
    assert psi.values[0] == 1.0
    assert np.all(psi.values >= 0)
    F = psi.normalized_cdf
    assert np.all(np.diff(F) >= 0)
    assert 0 < F[-1] <= 1 + 1e-12


@pytest.mark.parametrize("k", [power_law_kernel(0.3), power_law_kernel(0.75, 0.6), geometric_kernel(0.8)])
def test_fft_matches_direct(k):
    L = 20_000
    d = psi_sequence(k, 0.999, L, method="direct").values
    f = psi_sequence(k, 0.999, L, method="fft").values
    np.testing.assert_allclose(f, d, rtol=1e-10, atol=1e-14)


def test_sampler_small_a():
    s = GeometricSumSampler(power_law_kernel(0.6), 1e-9)
    y = sample_geosum(s, 10_000, seed=1)
    assert np.mean(y == 0) >= 0.999


def test_sampler_wald_mean():
    s = GeometricSumSampler(finite_kernel([1]), 0.5)
    y = sample_geosum(s, 1_000_000, seed=3)
    assert y.mean() == pytest.approx(1.0, abs=0.01)


@pytest.mark.parametrize("k", [finite_kernel([1, 2]), geometric_kernel(0.5), power_law_kernel(0.6),
                               power_law_kernel(0.6, 0.4)])
def test_sampler_pmf_within_3_sigma(k):
    a = 0.8
    N = 1_000_000
    y = sample_geosum(GeometricSumSampler(k, a), N, seed=11)
    psi = psi_sequence(k, a, 30)
    p = geosum_pmf(psi, np.arange(31))
    freq = np.bincount(y[y <= 30], minlength=31) / N
    se = np.sqrt(p * (1 - p) / N)
    # a few of 31 cells may exceed 3 sigma by chance; 4.5 sigma bounds them all
    assert np.all(np.abs(freq - p) <= 4.5 * se + 1e-12)
    assert np.mean(np.abs(freq - p) <= 3 * se + 1e-12) >= 0.9
    # total mass: pmf table plus empirical tail
    assert p.sum() + np.mean(y > 30) == pytest.approx(1.0, abs=1e-3)


def test_pareto_inversion_against_table():
    # P[X >= N] = N^-alpha for N up to 1000
    k = power_law_kernel(0.6)
    rng = np.random.default_rng(5)
    x = k.sample_jumps(rng, 400_000)
    N = np.array([1, 2, 3, 5, 10, 30, 100, 300, 1000])
    emp = np.array([(x >= m).mean() for m in N])
    p = N ** -0.6
    assert np.all(np.abs(emp - p) <= 4 * np.sqrt(p * (1 - p) / x.size) + 1e-12)


def test_sampler_worker_invariance():
    s = GeometricSumSampler(power_law_kernel(0.6), 0.99)
    a = sample_geosum(s, 200_000, seed=9, workers=1)
    b = sample_geosum(s, 200_000, seed=9, workers=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_geosum(s, 200_000, seed=10))
