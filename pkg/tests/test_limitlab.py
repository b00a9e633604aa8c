import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from nuar.limitlab import (
    MAX_GRID,
    LimitError,
    brownian,
    cell_l2_mass,
    factor,
    frac_driver,
    fractional,
    grid_cov,
    integrate_paths,
    integrated_ou,
    integrated_ou_cov_fubini,
    limit_cov,
    sample_limit,
)
from nuar.mlf import MlfParams, ml_density

VAR_OU1 = 1 + 2 * math.exp(-1) - math.exp(-2) / 2 - 1.5


def test_ou_variance_oracle():
    assert VAR_OU1 == pytest.approx(0.1680912, abs=1e-7)
    assert limit_cov(integrated_ou(1.0), 1, 1) == pytest.approx(VAR_OU1, rel=1e-13)
    q = integrate.quad(lambda u: (1 - math.exp(-u)) ** 2, 0, 1, epsabs=1e-14)[0]
    assert q == pytest.approx(VAR_OU1, rel=1e-12)


@pytest.mark.parametrize("law", [integrated_ou(2.0), fractional(0.6, 1.0), brownian()])
def test_zero_time(law):
    assert limit_cov(law, 0.0, 0.7) == 0.0 and limit_cov(law, 0.4, 0.0) == 0.0


@pytest.mark.parametrize("ts", [(1.0, 1.0), (1.0, 0.5)])
def test_fractional_one_is_ou(ts):
    assert limit_cov(fractional(1.0, 1.7), *ts) == pytest.approx(limit_cov(integrated_ou(1.7), *ts), abs=1e-8)


def test_fubini_consistency():
    rng = np.random.default_rng(3)
    for kappa in (0.3, 1.0, 4.0):
        for t, s in rng.random((10, 2)):
            assert integrated_ou_cov_fubini(kappa, t, s) == pytest.approx(
                limit_cov(integrated_ou(kappa), t, s), abs=1e-10)


def test_frac_cov_against_direct_quadrature():
    law = fractional(0.6, 1.0)
    p = MlfParams(0.6, 1.0)
    from nuar.mlf import ml_cdf

    t, s = 0.9, 0.4
    direct = integrate.quad(lambda u: ml_cdf(p, t - u) * ml_cdf(p, s - u), 0, s, epsabs=1e-13, limit=200)[0]
    assert limit_cov(law, t, s) == pytest.approx(direct, abs=1e-9)


@pytest.mark.parametrize("law", [integrated_ou(1.0), fractional(0.3, 1.0), fractional(0.75, 2.0)])
def test_grid_cov_matches_pointwise(law):
    G = 16
    C = grid_cov(law, G)
    assert np.array_equal(C, C.T)
    for i, j in [(0, 0), (3, 9), (15, 15), (7, 15)]:
        assert C[i, j] == pytest.approx(limit_cov(law, (i + 1) / G, (j + 1) / G), abs=1e-9)


def test_grid_limits():
    with pytest.raises(LimitError):
        grid_cov(brownian(), MAX_GRID + 1)
    with pytest.raises(LimitError):
        factor(-np.eye(3))


laws = st.one_of(
    st.builds(integrated_ou, st.floats(0.1, 10)),
    st.builds(fractional, st.floats(0.1, 1.0), st.floats(0.2, 5)),
)


@given(laws, st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=40, deadline=None)
def test_cov_symmetric(law, t, s):
    assert limit_cov(law, t, s) == limit_cov(law, s, t)


@given(laws, st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=40, deadline=None)
def test_cov_monotone_in_t(law, s, t1, t2):
    t1, t2 = sorted((max(t1, s), max(t2, s)))
    assert limit_cov(law, t1, s) <= limit_cov(law, t2, s) + 1e-12


def test_sample_limit_ou_variance():
    ens = sample_limit(integrated_ou(1.0), 50, 10_000, seed=4)
    assert np.all(ens.paths[:, 0] == 0.0)
    z2 = ens.paths[:, -1] ** 2
    assert abs(z2.mean() - VAR_OU1) < 3 * z2.std() / math.sqrt(z2.size)
    S = np.cov(ens.paths[:, 1:].T)
    assert np.allclose(S, S.T) and np.linalg.eigvalsh(S).min() > -1e-12
    assert ens.meta["jitter"] in (0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10)


def test_sample_limit_worker_invariance():
    a = sample_limit(fractional(0.4, 1.0), 64, 150, seed=1, workers=1)
    b = sample_limit(fractional(0.4, 1.0), 64, 150, seed=1, workers=3)
    assert np.array_equal(a.paths, b.paths)


def test_first_cell_mass_exact():
    p = MlfParams(0.75, 1.0)
    G = 64
    h = 1 / G
    # substitute x = u^(1/(2 alpha - 1)) so the integrand is smooth at 0
    r = 1 / (2 * p.alpha - 1)
    exact = integrate.quad(lambda u: r * u ** (r - 1) * ml_density(p, u**r) ** 2, 0, h ** (1 / r),
                           epsabs=1e-14, limit=200)[0]
    m = cell_l2_mass(p, G)
    assert m[0] == pytest.approx(exact, rel=1e-9)
    full = integrate.quad(lambda u: r * u ** (r - 1) * ml_density(p, u**r) ** 2, 0, 1, epsabs=1e-14, limit=200)[0]
    assert m.sum() == pytest.approx(full, rel=1e-8)
    with pytest.raises(LimitError):
        cell_l2_mass(MlfParams(0.5, 1.0), G)


def test_frac_driver_exponential_case():
    lam = 1.5
    ens = frac_driver(MlfParams(1.0, lam), 256, 10_000, seed=2)
    y2 = ens.paths[:, -1] ** 2
    target = lam * (1 - math.exp(-2 * lam)) / 2
    assert abs(y2.mean() - target) < 3 * y2.std() / math.sqrt(y2.size)
    with pytest.raises(LimitError):
        frac_driver(MlfParams(0.4, 1.0), 16, 4, seed=0)


def test_driver_integral_matches_limit_variance():
    # integrating Y gives Z; compare with the covariance of sample_limit's law
    p = MlfParams(0.75, 1.0)
    G = 512
    R = 4000
    Z = integrate_paths(frac_driver(p, G, R, seed=8))
    law = fractional(0.75, 1.0)
    for t in (0.25, 0.5, 1.0):
        v = Z[:, int(t * G)] ** 2
        se = v.std() / math.sqrt(R)
        # MC noise plus an O(h^(2 alpha - 1)) discretisation allowance
        assert abs(v.mean() - limit_cov(law, t, t)) < 3 * se + 0.02 * limit_cov(law, t, t)
