"""Gaussian limit processes Z_t = int_0^t G(t - u) dW_u and the fractional driver.

Kernels G:

* ``ou``        -- 1 - exp(-kappa x), an integrated Ornstein-Uhlenbeck process;
* ``frac``      -- the Mittag-Leffler cdf F^{alpha,lambda}(x);
* ``brownian``  -- G = 1, standard Brownian motion (test fixture).

Covariances follow from the Ito isometry, Cov(Z_t, Z_s) = int_0^{s^t} G(t-u) G(s-u) du.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import fft as sfft
from scipy import integrate, linalg

from .mlf import MlfParams, ml_cdf, ml_density, mittag_leffler
from .pathsim import PathEnsemble, uniform_grid
from .seeding import CHUNK, chunk_ranges, derived_rng, ordered_map

MAX_GRID = 2000
JITTERS = (0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10)
QUAD_TOL = 1e-8
_GL_X, _GL_W = leggauss(10)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
_LEVELS = 48      # geometric refinement of the first cell
_NEAR = 4         # first-cell lags integrated directly; farther ones use product weights


class LimitError(ValueError):
    pass


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LimitLaw:
    regime: str
    kappa: float | None = None
    alpha: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.regime == "ou":
            if self.kappa is None or self.kappa <= 0:
                raise LimitError("integrated OU law needs kappa > 0")
        elif self.regime == "frac":
            MlfParams(self.alpha, self.lam)
        elif self.regime != "brownian":
            raise LimitError(f"unknown limit law {self.regime!r}")

    @property
    def params(self) -> MlfParams:
        return MlfParams(self.alpha, self.lam)

    def kernel(self, x):
        """G(x) for x >= 0."""
        x = np.asarray(x, dtype=float)
        if self.regime == "ou":
            return -np.expm1(-self.kappa * x)
        if self.regime == "frac":
            return np.asarray(ml_cdf(self.params, x))
        return np.ones_like(x)

    def to_dict(self) -> dict[str, Any]:
        if self.regime == "ou":
            return {"law": "ou", "kappa": self.kappa}
        if self.regime == "frac":
            return {"law": "frac", "alpha": self.alpha, "lambda": self.lam}
        return {"law": "brownian"}


def integrated_ou(kappa: float) -> LimitLaw:
    return LimitLaw("ou", kappa=float(kappa))


def fractional(alpha: float, lam: float) -> LimitLaw:
    return LimitLaw("frac", alpha=float(alpha), lam=float(lam))


def brownian() -> LimitLaw:
    return LimitLaw("brownian")


def _ou_cov(k: float, t, s):
    t, s = np.maximum(t, s), np.minimum(t, s)
    e = np.expm1
    # s - (e^{-k(t-s)} - e^{-kt})/k - (1 - e^{-ks})/k + (e^{-k(t-s)} - e^{-k(t+s)})/(2k)
    return (
        s
        - (e(-k * (t - s)) - e(-k * t)) / k
        + e(-k * s) / k
        + (e(-k * (t - s)) - e(-k * (t + s))) / (2 * k)
    )


def integrated_ou_cov_fubini(kappa: float, t, s):
    """Covariance of int_0^t X_u du with dX = -kappa X dt + kappa dW, X_0 = 0.

    Closed form of the double integral of Cov(X_a, X_b) = kappa/2 (e^{-kappa|a-b|} - e^{-kappa(a+b)}).
    """
    k = kappa
    t, s = np.maximum(t, s), np.minimum(t, s)
    As = -np.expm1(-k * s)
    At = -np.expm1(-k * t)
    Ad = -np.expm1(-k * (t - s))
    return s - As / k + Ad * As / (2 * k) - At * As / (2 * k)


def limit_cov(law: LimitLaw, t: float, s: float) -> float:
    """Cov(Z_t, Z_s); symmetric in (t, s)."""
    t, s = float(t), float(s)
    if not (0.0 <= t <= 1.0 and 0.0 <= s <= 1.0):
        raise LimitError("t and s must lie in [0, 1]")
    lo, hi = min(t, s), max(t, s)
    if lo == 0.0:
        return 0.0
    if law.regime == "brownian":
        return lo
    if law.regime == "ou":
        return float(_ou_cov(law.kappa, hi, lo))
    p = law.params

    def g(u):
        return ml_cdf(p, hi - u) * ml_cdf(p, lo - u)

    val, err = integrate.quad(g, 0.0, lo, epsabs=1e-12, epsrel=1e-10, limit=200)
    if not err <= QUAD_TOL:
        raise QuadratureError(f"quadrature error estimate {err:.2e} exceeds {QUAD_TOL:g} at (t, s) = ({t}, {s})")
    return float(val)


# -- covariance on a uniform grid ----------------------------------------------

def _graded_nodes(h: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on (0, h] refined geometrically towards 0."""
    xs, ws = [], []
    for lev in range(_LEVELS):
        a, b = h * 2.0 ** (-lev - 1), h * 2.0**-lev
        xs.append(a + (b - a) * _GL_X)
        ws.append((b - a) * _GL_W)
    return np.concatenate(xs), np.concatenate(ws)


def _lagrange_at(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """L[k, i] = l_k(x_i) for the Lagrange basis on ``nodes``."""
    L = np.ones((len(nodes), len(x)))
    for k, xk in enumerate(nodes):
        for j, xj in enumerate(nodes):
            if j != k:
                L[k] *= (x - xj) / (xk - xj)
    return L


def _frac_grid_cov(law: LimitLaw, G: int) -> np.ndarray:
    """Cov(Z_{i/G}, Z_{j/G}) for i, j = 1..G with cellwise Gauss-Legendre quadrature."""
    h = 1.0 / G
    p = law.params
    q = np.arange(2 * G)[:, None]
    Fq = np.asarray(ml_cdf(p, (q + _GL_X[None, :]) * h))          # F at the nodes of cell q
    vx, vw = _graded_nodes(h)
    Fv = np.asarray(ml_cdf(p, vx))
    # first cell, lags d >= _NEAR: product rule with moments of F against the Lagrange basis
    mom = _lagrange_at(_GL_X * h, vx) @ (vw * Fv)
    first = np.empty(G)
    for d in range(min(_NEAR, G)):
        first[d] = np.sum(vw * Fv * np.asarray(ml_cdf(p, vx + d * h)))
    if G > _NEAR:
        first[_NEAR:] = Fq[_NEAR:G] @ mom
    cov = np.empty((G, G))
    for d in range(G):
        m = G - d
        cells = h * (Fq[d + 1 : d + m] * Fq[1:m]) @ _GL_W
        run = np.cumsum(np.concatenate([[first[d]], cells]))
        j = np.arange(m)
        cov[j + d, j] = run
        cov[j, j + d] = run
    return cov


def grid_cov(law: LimitLaw, G: int) -> np.ndarray:
    """Covariance matrix of (Z_{1/G}, ..., Z_1)."""
    if not 1 <= G <= MAX_GRID:
        raise LimitError(f"grid resolution must lie in [1, {MAX_GRID}], got {G}")
    t = uniform_grid(G)[1:]
    if law.regime == "frac":
        return _frac_grid_cov(law, G)
    T, S = np.meshgrid(t, t, indexing="ij")
    if law.regime == "ou":
        return _ou_cov(law.kappa, T, S)
    return np.minimum(T, S)


def factor(cov: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor with the smallest diagonal shift from JITTERS that works."""
    eye = np.eye(len(cov))
    for jitter in JITTERS:
        try:
            return linalg.cholesky(cov + jitter * eye, lower=True), jitter
        except linalg.LinAlgError:
            continue
    raise LimitError(f"covariance is not positive definite even with jitter {JITTERS[-1]:g}")


def sample_limit(law: LimitLaw, G: int, replicas: int, seed: int, workers: int = 1) -> PathEnsemble:
    """Exact Gaussian samples of Z on the grid k/G, k = 0..G."""
    if replicas < 1:
        raise LimitError("replicas must be >= 1")
    chol, jitter = factor(grid_cov(law, G))

    def run(r):
        lo, hi = r
        xi = np.stack([derived_rng(seed, i).standard_normal(G) for i in range(lo, hi)])
        return xi @ chol.T

    body = np.concatenate(ordered_map(run, chunk_ranges(replicas, CHUNK), workers))
    paths = np.hstack([np.zeros((replicas, 1)), body])
    meta = {"kind": "limit", "law": law.to_dict(), "G": G, "replicas": replicas, "master_seed": seed, "jitter": jitter}
    return PathEnsemble(uniform_grid(G), paths, meta)


# -- fractional driver ---------------------------------------------------------

def cell_l2_mass(p: MlfParams, G: int) -> np.ndarray:
    """int over [j h, (j+1) h] of f^2, j = 0..G-1, h = 1/G (requires alpha > 1/2)."""
    if p.alpha <= 0.5:
        raise LimitError("f^2 is not integrable at 0 for alpha <= 1/2")
    h = 1.0 / G
    out = np.empty(G)
    if G > 1:
        x = (np.arange(1, G)[:, None] + _GL_X[None, :]) * h
        out[1:] = h * np.square(ml_density(p, x)) @ _GL_W
    # first cell: u = h w^r with r = 1/(2 alpha - 1) absorbs the u^(2 alpha - 2) singularity
    a = p.alpha
    r = 1.0 / (2.0 * a - 1.0)
    gx, gw = leggauss(32)
    w = 0.5 * (gx + 1.0)
    u = h * w**r
    if a == 1.0:
        g = (p.lam * np.exp(-p.lam * u)) ** 2
    else:
        g = (p.lam * np.asarray(mittag_leffler(a, a, -p.lam * u**a))) ** 2
    out[0] = h ** (2 * a - 1) * r * 0.5 * gw @ g
    return out


def frac_driver(p: MlfParams, G: int, replicas: int, seed: int, workers: int = 1) -> PathEnsemble:
    """Y_t = int_0^t f(t - u) dW_u on the grid k/G.

    Y_{t_i} = sum_{j<i} w_j dW_{i-1-j} with w_j = sqrt(cell L2 mass of f / h), so
    Var(Y_{t_i}) = int_0^{t_i} f^2 exactly; within-cell variation of f is
    neglected, an O(h^(2 alpha - 1)) error in the increment structure.
    """
    if p.alpha <= 0.5:
        raise LimitError("the fractional driver needs alpha > 1/2")
    if replicas < 1:
        raise LimitError("replicas must be >= 1")
    h = 1.0 / G
    w = np.sqrt(cell_l2_mass(p, G) / h)
    nf = sfft.next_fast_len(2 * G, real=True)
    fw = sfft.rfft(w, nf)

    def run(r):
        lo, hi = r
        dW = math.sqrt(h) * np.stack([derived_rng(seed, i).standard_normal(G) for i in range(lo, hi)])
        return sfft.irfft(sfft.rfft(dW, nf, axis=1) * fw, nf, axis=1)[:, :G]

    body = np.concatenate(ordered_map(run, chunk_ranges(replicas, CHUNK), workers))
    paths = np.hstack([np.zeros((replicas, 1)), body])
    meta = {"kind": "frac_driver", "alpha": p.alpha, "lambda": p.lam, "G": G, "replicas": replicas, "master_seed": seed}
    return PathEnsemble(uniform_grid(G), paths, meta)


def integrate_paths(ens: PathEnsemble) -> np.ndarray:
    """Trapezoidal running integral int_0^t Y_u du of each path."""
    h = np.diff(ens.grid)
    inc = 0.5 * (ens.paths[:, 1:] + ens.paths[:, :-1]) * h
    return np.hstack([np.zeros((ens.replicas, 1)), np.cumsum(inc, axis=1)])
