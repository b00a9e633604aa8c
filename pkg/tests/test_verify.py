import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sst

from nuar.kernel import finite_kernel, geometric_kernel, power_law_kernel
from nuar.limitlab import brownian, sample_limit
from nuar.pathsim import heavy_schedule, light_schedule
from nuar.seeding import chunk_ranges, derived_rng, ordered_map, sub_seed
from nuar.verify import checks
from nuar.verify.report import VerificationReport
from nuar.verify.stats import dyadic_lags, fit_line, hurst_estimate, ks_noise_band, ks_statistic, variogram
from nuar.verify.suite import GROUPS, ConfigError, load_profiles, resolve_profile, run_check, run_group


def uniform_cdf(x):
    return np.clip(x, 0, 1)


def test_ks_known_values():
    assert ks_statistic([0.0, 1.0], uniform_cdf) == 0.5
    assert ks_statistic([0.25, 0.75], uniform_cdf) == 0.25
    with pytest.raises(ValueError):
        ks_statistic([0.5], uniform_cdf)


def test_ks_matches_scipy():
    x = np.random.default_rng(0).exponential(size=5000)
    assert ks_statistic(x, lambda u: 1 - np.exp(-u)) == pytest.approx(sst.kstest(x, "expon").statistic, abs=1e-14)


@given(st.lists(st.floats(0, 1), min_size=2, max_size=200))
@settings(max_examples=80, deadline=None)
def test_ks_bounds(xs):
    d = ks_statistic(xs, uniform_cdf)
    assert 1 / (2 * len(xs)) - 1e-12 <= d <= 1


def test_noise_band():
    assert ks_noise_band(10_000) == pytest.approx(0.002603)


@given(st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=30, deadline=None)
def test_fit_line_exact(m, b):
    x = np.linspace(0, 5, 9)
    slope, icpt, rss = fit_line(x, m * x + b)
    assert slope == pytest.approx(m, abs=1e-10) and icpt == pytest.approx(b, abs=1e-10) and rss < 1e-18


def test_variogram_and_lags():
    grid = np.arange(17) / 16
    lags, scales = dyadic_lags(grid, (1 / 16, 1 / 2))
    assert lags.tolist() == [1, 2, 4, 8] and scales.tolist() == [1 / 16, 1 / 8, 1 / 4, 1 / 2]
    paths = np.arange(17.0)[None, :]
    np.testing.assert_allclose(variogram(paths, [1, 2, 4]), [1, 4, 16])


def test_hurst_of_brownian_fixture():
    ens = sample_limit(brownian(), 1024, 200, seed=3)
    assert hurst_estimate(ens, (2**-10, 2**-4)) == pytest.approx(0.5, abs=0.03)
    with pytest.raises(ValueError):
        hurst_estimate(ens, (0.1, 0.2))


def test_seeding_contract():
    assert derived_rng(1, 2).random() == derived_rng(1, 2).random()
    assert derived_rng(1, 2).random() != derived_rng(1, 3).random()
    assert sub_seed(5, 7) == sub_seed(5, 7) != sub_seed(5, 8)
    assert 0 <= sub_seed(5, 7) < 2**63
    assert chunk_ranges(130, 64) == [(0, 64), (64, 128), (128, 130)]
    assert ordered_map(lambda x: x * x, range(20), workers=4) == [x * x for x in range(20)]


def test_report_round_trip():
    r = VerificationReport("x", {"a": np.float64(1.5)}, [1], [{"v": np.int64(2), "w": math.inf}], None, 0.1,
                           np.bool_(True), {"master_seed": 0}, runtime_sec=3.2)
    d = r.to_dict()
    assert d["runtime_sec"] is None and r.to_dict(timings=True)["runtime_sec"] == 3.2
    assert d["per_n"][0] == {"v": 2, "w": "inf"} and d["passed"] is True
    assert r.summary().startswith("PASS x")


def test_profiles_resolve():
    prof = load_profiles()
    assert prof["version"] == 1 and {"default", "fast", "strict"} <= set(prof["profiles"])
    for name in ("default", "fast", "strict"):
        cfg = resolve_profile(name)
        assert set(cfg) == set(GROUPS["all"])
    assert resolve_profile("fast")["geosum_light"]["samples_per_n"] == 20000
    assert resolve_profile("default", {"geosum_light": {"tol": 0.5}})["geosum_light"]["tol"] == 0.5
    with pytest.raises(ConfigError):
        resolve_profile("nope")
    with pytest.raises(ConfigError):
        resolve_profile("default", {"bogus": {}})
    with pytest.raises(ConfigError):
        resolve_profile("default", {"geosum_light": {"colour": 1}})


def test_default_tolerances_frozen():
    d = resolve_profile("default")
    assert d["geosum_light"]["tol"] == 0.02 and d["geosum_heavy"]["tol"] == 0.03
    assert d["psi_cdf_light"]["tol"] == 0.01 and d["psi_cdf_heavy"]["tol"] == 0.03
    assert d["donsker_light"]["tol"] == 0.1 and d["donsker_light"]["ks_tol"] == 0.02
    assert d["donsker_heavy"]["tol"] == 0.15
    assert d["scaling_light"]["tol_exact"] == 0.05 and d["scaling_light"]["tol_mc"] == 0.1
    assert d["offdiag_alpha_0.25"]["tol"] == 0.1
    assert d["hurst_brownian"]["tol"] == 0.03 and d["hurst_limit"]["tol"] == 0.05
    assert d["special_functions"]["tol_exact"] == 1e-12 and d["special_functions"]["tol_small"] == 0.01


def test_geosum_light_small():
    r = checks.verify_geosum_light(geometric_kernel(0.5), 1.0, [100, 1000], 20000, seed=1, tol=0.03)
    assert r.passed and r.per_n[1]["ks"] < 0.03
    again = checks.verify_geosum_light(geometric_kernel(0.5), 1.0, [100, 1000], 20000, seed=1, tol=0.03, workers=3)
    assert r.to_json() == again.to_json()


def test_geosum_heavy_alpha_one_reduces_to_light():
    a = checks.verify_geosum_heavy(1.0, 1.0, [100, 1000], 5000, seed=2, laplace_z=())
    b = checks.verify_geosum_light(finite_kernel([1]), 1.0, [100, 1000], 5000, seed=2)
    assert [x["ks"] for x in a.per_n[:2]] == pytest.approx([x["ks"] for x in b.per_n[:2]], abs=1e-15)


def test_heavy_literal_delta_gives_rescaled_law():
    # the literal K Gamma(1-alpha)/alpha constant makes Y/n converge to the lambda/alpha law
    alpha = 0.6
    k = power_law_kernel(alpha)
    sched = heavy_schedule(k, 1.0)
    literal = 1.0 * math.gamma(1 - alpha) / alpha
    assert literal == pytest.approx(sched.delta / alpha)
    r = checks.verify_geosum_heavy(alpha, 1.0, [10000], 20000, seed=5, delta=literal, laplace_z=())
    assert r.per_n[0]["ks"] > 0.1
    from nuar.mlf import MlfParams, ml_cdf
    from nuar.convseries import GeometricSumSampler, sample_geosum

    n = 10000
    Y = sample_geosum(GeometricSumSampler(k, 1 - literal / n**alpha), 20000, 5) / n
    assert ks_statistic(Y, lambda x: ml_cdf(MlfParams(alpha, 1 / alpha), x)) < 0.03


def test_psi_cdf_check():
    r = checks.verify_psi_cdf(finite_kernel([1]), light_schedule(1.0), [100, 1000])
    errs = [x["sup_error"] for x in r.per_n]
    assert r.passed and errs[1] < 0.01 and errs[1] < errs[0]


def test_scaling_exact_light():
    k = geometric_kernel(0.5)
    r = checks.scaling_exponent(k, light_schedule(1.0), [256, 512, 1024, 2048], 1.0, 0, seed=0)
    assert r.fitted_exponent == pytest.approx(1.0, abs=0.05) and r.passed
    assert checks.expected_scaling(power_law_kernel(0.75)) == pytest.approx(2 - 1 / 0.75)
    with pytest.raises(ValueError):
        checks.scaling_exponent(k, light_schedule(1.0), [256, 512], 1.0, 0, seed=0)


def test_cross_moments_against_direct_sum():
    psi = np.random.default_rng(0).random(200)
    k = 150
    direct = [np.sum(psi[: k + 1] * psi[l : k + l + 1]) for l in (1, 5, 20)]
    np.testing.assert_allclose(checks.cross_moments(psi, k, [1, 5, 20]), direct, rtol=1e-12)


def test_special_functions_check():
    r = checks.verify_special_functions()
    assert r.passed and all(c["passed"] for c in r.per_n)


def test_run_group_only_and_check_ids():
    out = run_group("light", "fast", seed=3, only=["psi_cdf_light"])
    assert [r.check_id for r in out] == ["psi_cdf_light"]
    with pytest.raises(ConfigError):
        run_group("nope")
    with pytest.raises(ConfigError):
        run_check("x", {"check": "bogus"}, 0)


def test_ks_at_quantiles():
    N = 999
    x = np.arange(1, N + 1) / (N + 1)
    assert ks_statistic(x, uniform_cdf) <= 1 / (N + 1) + 1e-12


def test_ks_exponential_sample():
    x = np.random.default_rng(17).exponential(size=100_000)
    from nuar.mlf import exp_limit_cdf

    assert ks_statistic(x, lambda u: exp_limit_cdf(1.0, u)) < 0.006


def test_geosum_degenerate_unit_atom():
    r = checks.verify_geosum_light(finite_kernel([1]), 1.0, [10_000], 100_000, seed=4)
    assert r.per_n[0]["ks"] < 0.01


def test_offdiag_lag_zero_is_diagonal():
    from nuar.convseries import psi_sequence

    psi = psi_sequence(power_law_kernel(0.25), 0.99, 3000)
    assert checks.cross_moments(psi.values, 2000, [0])[0] == pytest.approx(psi.sq_partial_sums()[2000], rel=1e-12)


def test_offdiag_light_is_exponential():
    r = checks.verify_offdiag_decay(finite_kernel([1]), light_schedule(1.0), 1024, [16, 32, 64, 128, 256, 512])
    assert r.passed


def test_increment_single_cell_branch():
    # floor(nt) = floor(ns): Z_t - Z_s = (1-a)/sqrt(n) (nt - ns) y_{k+1}
    from nuar.convseries import psi_sequence
    from nuar.pathsim import donsker_weights

    n, a = 1000, 0.999
    psi = psi_sequence(geometric_kernel(0.5), a, n + 1)
    s, t = 0.2501, 0.2504
    d = donsker_weights(psi, n, t) - donsker_weights(psi, n, s)
    k = 250
    expected = ((1 - a) / math.sqrt(n) * n * (t - s)) ** 2 * psi.sq_partial_sums()[k + 1]
    assert d @ d == pytest.approx(expected, rel=1e-9)
