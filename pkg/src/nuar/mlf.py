"""Mittag-Leffler functions and the limit laws built from them.

E_{a,b}(z) = sum_k z^k / Gamma(a k + b) is evaluated for real z.  For
negative z and 0 < a < 1 three regimes are used, selected per point:

* power series while its cancellation error eps * sum|t_k| stays below
  ``tol`` (roughly |z|^(1/a) <= 7);
* the asymptotic expansion -sum_{k>=1} z^-k / Gamma(b - a k), truncated at
  its smallest term, once that term is below ``tol`` (|z|^(1/a) >~ 30);
* in between, the spectral (Laplace-type) integral representation for
  b in {1, a}, which has a positive integrand, and an arbitrary-precision
  series otherwise.

The two crossover points depend on (a, b) and are returned by
:func:`crossover`.  Positive arguments always use the series, whose terms
are then all positive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gamma, gammaln, gammasgn

EPS = np.finfo(float).eps
TOL = 1e-13
_SPECTRAL_MAX = 0.99


class MittagLefflerError(ArithmeticError):
    pass


@dataclass(frozen=True)
class MlfParams:
    """Identifies the law f^{alpha,lambda}; alpha = 1 is the exponential law."""

    alpha: float
    lam: float
    K: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.lam <= 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")

    @property
    def delta(self) -> float:
        return delta_const(self.K, self.alpha) if self.alpha < 1.0 else 1.0


def delta_const(K: float, alpha: float) -> float:
    """delta = K Gamma(1 - alpha) / alpha."""
    if K <= 0 or not 0.0 < alpha < 1.0:
        raise ValueError("need K > 0 and 0 < alpha < 1")
    return K * gamma(1.0 - alpha) / alpha


# -- series -----------------------------------------------------------------

def _series_terms(alpha: float, beta: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum and absolute sum of the power series, evaluated in log space."""
    az = np.abs(z)
    zmax = float(az.max(initial=0.0))
    lz = math.log(zmax) if zmax > 0 else -np.inf
    k = 0
    # run past the peak term until terms are below 1e-40 relative to 1
    while True:
        k += 32
        if k * lz - gammaln(alpha * k + beta) < -92.0 and alpha * k + beta > 2:
            break
        if k > 200_000:
            raise MittagLefflerError(f"power series does not converge for |z| = {zmax:g}")
    ks = np.arange(k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logt = np.multiply.outer(np.log(az), ks) - gammaln(alpha * ks + beta)
    logt[:, 0] = -gammaln(beta)
    mag = np.exp(logt)
    sign = np.where((z[:, None] < 0) & (ks % 2 == 1), -1.0, 1.0)
    terms = mag * sign
    return terms.sum(axis=1), np.abs(terms).sum(axis=1)


# -- asymptotic -------------------------------------------------------------

_ASYM_KMAX = 400


def _asymptotic_terms(alpha: float, beta: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Optimally truncated -sum z^-k / Gamma(beta - alpha k) and its error."""
    ks = np.arange(1, _ASYM_KMAX + 1)
    arg = beta - alpha * ks
    # 1/Gamma(arg) = sgn * exp(-gammaln(arg)); zero at the poles arg = 0, -1, ...
    pole = (arg <= 0.5) & (np.abs(arg - np.round(arg)) < 1e-9 * np.maximum(1.0, np.abs(arg)))
    sgn = np.where(pole, 0.0, gammasgn(np.where(pole, 1.0, arg)))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        logmag = -np.multiply.outer(np.log(np.abs(z)), ks) - np.where(pole, 0.0, gammaln(np.where(pole, 1.0, arg)))
    # truncate where the 3-term envelope is smallest, so accidental near-zero
    # terms close to a pole do not fake convergence
    finite = np.where(pole, -np.inf, logmag)
    env = np.maximum(np.maximum(finite, np.roll(finite, -1, axis=1)), np.roll(finite, -2, axis=1))
    env[:, -2:] = finite[:, -2:]
    env = np.where(np.isneginf(env), np.inf, env)
    kstar = np.argmin(env, axis=1)
    keep = np.arange(_ASYM_KMAX)[None, :] < kstar[:, None]
    keep[kstar == _ASYM_KMAX - 1] = True
    sign = np.where((z[:, None] < 0) & (ks % 2 == 1), -1.0, 1.0) * sgn
    with np.errstate(over="ignore"):
        terms = np.where(keep & ~pole, -sign * np.exp(np.minimum(logmag, 700.0)), 0.0)
    err = np.exp(np.take_along_axis(env, kstar[:, None], axis=1)[:, 0])
    return terms.sum(axis=1), err


# -- bridge -----------------------------------------------------------------

def _spectral(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    """E_{a,1} and E_{a,a} at z < 0 via their Laplace-type representation.

    E_a(-t^a) = int_0^inf exp(-r t) K(r) dr with
    K(r) = sin(a pi)/pi * r^(a-1) / (r^(2a) + 2 r^a cos(a pi) + 1), and
    E_{a,a}(-t^a) = t^(1-a) int_0^inf r exp(-r t) K(r) dr.
    Trapezoid rule in u = log(r t), exponentially convergent.
    """
    t = np.abs(z) ** (1.0 / alpha)
    width = math.pi * (1.0 - alpha) / alpha
    h = min(0.05, width / 8.0)
    u_lo = (math.log(1e-18) - 2.0) / alpha - 2.0
    u = np.arange(u_lo, 4.2, h)
    eu = np.exp(u)
    r = eu[None, :] / t[:, None]
    ra = r**alpha
    kern = math.sin(alpha * math.pi) / math.pi * ra / (ra * ra + 2.0 * ra * math.cos(alpha * math.pi) + 1.0)
    w = np.exp(-eu)[None, :] * kern
    if beta == 1.0:
        return h * w.sum(axis=1)
    return t ** (1.0 - alpha) * h * (w * r).sum(axis=1)


def _mp_series(alpha: float, beta: float, z: float) -> float:
    X = abs(z) ** (1.0 / alpha) if z else 0.0
    with mpmath.workdps(int(30 + X / 2.3)):
        zz = mpmath.mpf(z)
        a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
        total = mpmath.mpf(0)
        k = 0
        while True:
            term = zz**k * mpmath.rgamma(a * k + b)
            total += term
            if k > 10 and alpha * k + beta > 2 and abs(term) < mpmath.mpf(10) ** (-25):
                break
            k += 1
            if k > 100_000:
                raise MittagLefflerError(f"high-precision series failed at z = {z:g}")
        return float(total)


# -- dispatch ---------------------------------------------------------------

@lru_cache(maxsize=256)
def crossover(alpha: float, beta: float, tol: float = TOL) -> tuple[float, float]:
    """(|z| up to which the series is used, |z| from which the expansion is used)."""
    grid = np.geomspace(0.05, 1e4, 1200)
    _, absum = _series_terms(alpha, beta, -grid[grid**(1 / alpha) < 700])
    ok_s = np.flatnonzero(absum * EPS * 4 <= tol)
    z_s = float(grid[ok_s[-1]]) if ok_s.size else 0.0
    if alpha >= 1.0:
        # no expansion for alpha = 1: the high-precision series bridges all larger |z|
        return z_s, math.inf
    _, err = _asymptotic_terms(alpha, beta, -grid)
    bad = np.flatnonzero(err > tol)
    if not bad.size:
        z_a = float(grid[0])
    elif bad[-1] + 1 < grid.size:
        z_a = float(grid[bad[-1] + 1])
    else:
        # expansion never reaches tol on the grid (alpha very close to 1)
        z_a = math.inf
    z_a = max(z_a, z_s)
    return z_s, z_a


def mittag_leffler(alpha: float, beta: float, z, method: str = "auto", tol: float = TOL):
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z), real z.

    ``method`` forces a regime: ``"series"``, ``"asymptotic"``,
    ``"spectral"`` or ``"mp"``; ``"auto"`` picks per point.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    z_in = np.asarray(z, dtype=float)
    zf = np.atleast_1d(z_in).ravel()
    out = np.empty_like(zf)

    if method != "auto":
        out[:] = _run(method, alpha, beta, zf, tol)
        return _shape(out, z_in)

    if alpha == 1.0 and beta == 1.0:
        return _shape(np.exp(zf), z_in)

    z_s, z_a = crossover(alpha, beta, tol)
    az = np.abs(zf)
    ser = (zf >= 0) | (az <= z_s)
    asy = ~ser & (az >= z_a)
    mid = ~ser & ~asy
    if ser.any():
        out[ser] = _run("series", alpha, beta, zf[ser], tol)
    if asy.any():
        out[asy] = _run("asymptotic", alpha, beta, zf[asy], tol)
    if mid.any():
        # the spectral step shrinks like 1 - alpha; the mp series is cheaper near 1
        bridge = "spectral" if alpha <= _SPECTRAL_MAX and beta in (1.0, alpha) else "mp"
        out[mid] = _run(bridge, alpha, beta, zf[mid], tol)
    return _shape(out, z_in)


def _run(method: str, alpha: float, beta: float, z: np.ndarray, tol: float) -> np.ndarray:
    if method == "series":
        return _series_terms(alpha, beta, z)[0]
    if method == "asymptotic":
        if np.any(z >= 0) or alpha >= 1.0:
            raise MittagLefflerError("asymptotic expansion implemented for z < 0, alpha < 1")
        val, err = _asymptotic_terms(alpha, beta, z)
        if np.any(err > max(tol, 1e-6)):
            raise MittagLefflerError(f"asymptotic expansion not converged (error {err.max():.2g})")
        return val
    if method == "spectral":
        if np.any(z >= 0) or alpha >= 1.0 or beta not in (1.0, alpha):
            raise MittagLefflerError("spectral representation needs z < 0, alpha < 1, beta in {1, alpha}")
        return _spectral(alpha, beta, z)
    if method == "mp":
        return np.array([_mp_series(alpha, beta, float(v)) for v in z])
    raise ValueError(f"unknown method {method!r}")


def _shape(out: np.ndarray, like: np.ndarray):
    if like.ndim == 0:
        return float(out[0])
    return out.reshape(like.shape)


# -- limit laws -------------------------------------------------------------

def ml_density(p: MlfParams, x):
    """f(x) = lambda x^(alpha-1) E_{alpha,alpha}(-lambda x^alpha), x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("density is defined for x > 0")
    if p.alpha == 1.0:
        out = p.lam * np.exp(-p.lam * x)
    else:
        out = p.lam * x ** (p.alpha - 1.0) * mittag_leffler(p.alpha, p.alpha, -p.lam * x**p.alpha)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def ml_cdf(p: MlfParams, x):
    """F(x) = 1 - E_{alpha,1}(-lambda x^alpha), x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("cdf is defined for x >= 0")
    if p.alpha == 1.0:
        out = -np.expm1(-p.lam * x)
    else:
        out = 1.0 - mittag_leffler(p.alpha, 1.0, -p.lam * x**p.alpha)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def ml_laplace(p: MlfParams, z):
    """lambda / (lambda + z^alpha), z >= 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("Laplace transform is evaluated at z >= 0")
    out = p.lam / (p.lam + z**p.alpha)
    return float(out) if out.ndim == 0 else out


def exp_limit_cdf(lambda_over_m: float, x):
    """1 - exp(-(lambda/m) x)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("cdf is defined for x >= 0")
    out = -np.expm1(-lambda_over_m * x)
    return float(out) if out.ndim == 0 else out
