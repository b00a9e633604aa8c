"""Goodness-of-fit and scaling statistics shared by the checks."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..pathsim import PathEnsemble

# standard deviation of the Kolmogorov limit law of sqrt(N) D_N
KOLMOGOROV_SD = 0.2603


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup_x |F_N(x) - cdf(x)|, evaluated on both sides of every jump."""
    x = np.sort(np.asarray(samples, dtype=float))
    N = len(x)
    if N < 2:
        raise ValueError("KS statistic needs at least 2 samples")
    u, first = np.unique(x, return_index=True)
    last = np.append(first[1:], N)
    F = np.asarray(cdf(u), dtype=float)
    above = last / N - F          # empirical cdf at u
    below = F - first / N         # just left of u
    return float(max(above.max(), below.max()))


def ks_noise_band(N: int) -> float:
    """One standard deviation of the KS statistic under the null."""
    return KOLMOGOROV_SD / math.sqrt(N)


def fit_line(x, y) -> tuple[float, float, float]:
    """Least-squares slope, intercept and residual sum of squares."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rss = float(np.sum((A @ coef - y) ** 2))
    return float(coef[0]), float(coef[1]), rss


def loglog_slope(x, y) -> float:
    return fit_line(np.log(x), np.log(y))[0]


def mean_with_se(v) -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def variogram(paths: np.ndarray, lags) -> np.ndarray:
    """Mean over replicas and start times of (X_{i+l} - X_i)^2 for each lag l."""
    paths = np.atleast_2d(paths)
    return np.array([np.mean(np.square(paths[:, l:] - paths[:, :-l])) for l in lags])


def dyadic_lags(grid: np.ndarray, scale_range: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    """Grid lags whose time span is a power of two inside ``scale_range``.

    On grids of 2^k steps the spans are exact dyadic scales; otherwise each
    dyadic number of grid steps 1, 2, 4, ... whose span lies in the range is used.
    """
    step = float(grid[1] - grid[0])
    lo, hi = scale_range
    lags = []
    l = 1
    while l * step <= hi * (1 + 1e-12) and l < len(grid):
        if l * step >= lo * (1 - 1e-12):
            lags.append(l)
        l *= 2
    lags = np.array(lags, dtype=int)
    return lags, lags * step


def hurst_estimate(ens: PathEnsemble, scale_range: tuple[float, float]) -> float:
    """H = slope / 2 of log variogram against log scale."""
    lags, scales = dyadic_lags(ens.grid, scale_range)
    if len(lags) < 3:
        raise ValueError(f"need at least 3 dyadic scales in {scale_range}, found {len(lags)}")
    v = variogram(ens.paths, lags)
    return loglog_slope(scales, v) / 2.0
