"""Nearly unstable AR(inf) paths and their renormalised Donsker lines.

The n-th process uses coefficients a_n * phi_i:

    y_0 = eps_0,   y_k = eps_k + sum_{i=1}^k a_n phi_i y_{k-i},

and the Donsker line on [0, 1] is

    Z^n_t = (1 - a_n)/sqrt(n) * (sum_{j<=floor(nt)} y_j + (nt - floor(nt)) y_{floor(nt)+1}).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy import fft as sfft

from .convseries import PsiSequence, psi_sequence
from .kernel import Kernel
from .mlf import delta_const
from .seeding import CHUNK, chunk_ranges, derived_rng, ordered_map

NOISES = ("gaussian", "rademacher")


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    """a_n = 1 - lam/n (light) or 1 - lam*delta/n^alpha (heavy)."""

    regime: str
    lam: float
    alpha: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.regime not in ("light", "heavy"):
            raise ScheduleError(f"regime must be 'light' or 'heavy', got {self.regime!r}")
        if self.lam <= 0:
            raise ScheduleError("lambda must be positive")
        if self.regime == "heavy":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ScheduleError("heavy schedule needs 0 < alpha < 1")
            if self.delta is None or self.delta <= 0:
                raise ScheduleError("heavy schedule needs delta > 0")

    def a(self, n: int) -> float:
        if self.regime == "light":
            a = 1.0 - self.lam / n
        else:
            a = 1.0 - self.lam * self.delta / n**self.alpha
        if not 0.0 < a < 1.0:
            raise ScheduleError(f"n = {n} is too small: a_n = {a:.6g} is outside (0, 1)")
        return a

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"regime": self.regime, "lambda": self.lam}
        if self.regime == "heavy":
            d.update(alpha=self.alpha, delta=self.delta)
        return d


def light_schedule(lam: float) -> Schedule:
    return Schedule("light", float(lam))


def heavy_schedule(kernel: Kernel, lam: float) -> Schedule:
    """Heavy schedule whose geometric sums converge to the Laplace law lam/(lam + z^alpha).

    With tail sum_{i>=N} phi_i ~ K N^-alpha the kernel's Laplace transform
    satisfies 1 - phi(s) ~ K Gamma(1-alpha) s^alpha, so the matching constant
    is K Gamma(1-alpha); this equals delta_const applied to the density-type
    constant alpha*K (phi_N ~ alpha K N^(-1-alpha)).
    """
    if kernel.light_tail:
        raise ScheduleError("heavy schedule needs a power-law kernel")
    alpha = kernel.tail_exponent
    return Schedule("heavy", float(lam), alpha, delta_const(alpha * kernel.tail_constant, alpha))


def schedule_for(kernel: Kernel, lam: float) -> Schedule:
    return light_schedule(lam) if kernel.light_tail else heavy_schedule(kernel, lam)


@dataclass(frozen=True)
class ArConfig:
    kernel: Kernel
    a_n: float
    n: int
    noise: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.a_n < 1.0:
            raise ScheduleError(f"a_n must lie in (0, 1), got {self.a_n}")
        if self.noise not in NOISES:
            raise ValueError(f"noise must be one of {NOISES}, got {self.noise!r}")


def make_config(kernel: Kernel, schedule: Schedule, n: int, noise: str = "gaussian", seed: int = 0) -> ArConfig:
    return ArConfig(kernel, schedule.a(n), int(n), noise, int(seed))


def draw_noise(rng: np.random.Generator, shape, family: str = "gaussian") -> np.ndarray:
    if family == "gaussian":
        return rng.standard_normal(shape)
    if family == "rademacher":
        return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    raise ValueError(f"unknown noise family {family!r}")


def replica_noise(cfg: ArConfig, N: int, replica: int = 0) -> np.ndarray:
    return draw_noise(derived_rng(cfg.seed, replica), N + 1, cfg.noise)


def simulate_ar(cfg: ArConfig, N: int, eps: np.ndarray | None = None, replica: int = 0) -> np.ndarray:
    """Exact AR recursion for y_0..y_N (kernel truncated at lag N)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if eps is None:
        eps = replica_noise(cfg, N, replica)
    eps = np.asarray(eps, dtype=float)[: N + 1]
    phi, _ = cfg.kernel.coeffs(N)
    nz = np.flatnonzero(phi)
    aphi = cfg.a_n * phi[: nz[-1] + 1]
    S = len(aphi)
    y = np.empty(N + 1)
    y[0] = eps[0]
    for k in range(1, N + 1):
        m = min(k, S)
        y[k] = eps[k] + aphi[:m] @ y[k - m : k][::-1]
    return y


def _check_psi(cfg: ArConfig, N: int, psi: PsiSequence) -> None:
    if psi.length < N:
        raise ValueError(f"psi has length {psi.length} < N = {N}")
    if psi.a_n != cfg.a_n or (psi.kernel is not None and psi.kernel != cfg.kernel):
        raise ValueError("psi was built for a different (kernel, a_n)")


def _ma(psi_vals: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Causal convolution y_k = sum_i psi_{k-i} eps_i along the last axis."""
    N1 = eps.shape[-1]
    nf = sfft.next_fast_len(2 * N1 - 1, real=True)
    fp = sfft.rfft(psi_vals[:N1], nf)
    return sfft.irfft(sfft.rfft(eps, nf, axis=-1) * fp, nf, axis=-1)[..., :N1]


def simulate_ar_ma(cfg: ArConfig, N: int, psi: PsiSequence, eps: np.ndarray | None = None, replica: int = 0) -> np.ndarray:
    """Moving-average route y_k = sum_i psi_{k-i} eps_i via FFT."""
    _check_psi(cfg, N, psi)
    if eps is None:
        eps = replica_noise(cfg, N, replica)
    return _ma(psi.values, np.asarray(eps, dtype=float)[: N + 1])


def _split_t(n: int, t):
    x = np.asarray(t, dtype=float) * n
    k = np.floor(x + 1e-9).astype(np.int64)
    return k, np.maximum(x - k, 0.0)


def donsker_line(path, a_n: float, n: int, t):
    """Z^n_t for one path (t scalar or array)."""
    path = np.asarray(path, dtype=float)
    k, frac = _split_t(n, t)
    need = np.where(frac > 0, k + 1, k)
    if np.any(np.asarray(t) < 0) or np.any(np.asarray(t) > 1):
        raise ValueError("t must lie in [0, 1]")
    if np.any(need >= len(path)):
        raise ValueError(f"path of length {len(path)} too short for t = {np.max(t)}")
    cs = np.cumsum(path)
    nxt = np.where(frac > 0, path[np.minimum(k + 1, len(path) - 1)], 0.0)
    out = (1.0 - a_n) / math.sqrt(n) * (cs[k] + frac * nxt)
    return float(out) if out.ndim == 0 else out


def donsker_weights(psi: PsiSequence, n: int, t: float) -> np.ndarray:
    """Coefficients c_i with Z^n_t = sum_i c_i eps_i (length n + 2)."""
    k, frac = _split_t(n, t)
    k, frac = int(k), float(frac)
    c = np.zeros(n + 2)
    C = psi.partial_sums
    i = np.arange(k + 1)
    c[: k + 1] = C[k - i]
    if frac > 0:
        c[: k + 1] += frac * psi.values[k + 1 - i]
        c[k + 1] = frac
    return (1.0 - psi.a_n) / math.sqrt(n) * c


def exact_donsker_cov(psi: PsiSequence, n: int, t: float, s: float) -> float:
    """E[Z^n_t Z^n_s] for unit-variance noise, from psi alone."""
    return float(donsker_weights(psi, n, t) @ donsker_weights(psi, n, s))


@dataclass
class PathEnsemble:
    grid: np.ndarray
    paths: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def replicas(self) -> int:
        return self.paths.shape[0]

    def to_csv(self, provenance: str | None = None) -> str:
        buf = io.StringIO()
        if provenance:
            buf.write(f"# {provenance}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([repr(float(t)) for t in self.grid])
        for row in self.paths:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self) -> dict[str, Any]:
        return {"grid": self.grid.tolist(), "paths": self.paths.tolist(), "meta": self.meta}


def uniform_grid(points: int) -> np.ndarray:
    """``points`` + 1 equally spaced times k/points on [0, 1]."""
    if points < 1:
        raise ValueError("grid needs at least one step")
    return np.arange(points + 1) / points


def donsker_ensemble(
    cfg: ArConfig,
    schedule: Schedule | None,
    grid,
    replicas: int,
    psi: PsiSequence | None = None,
    workers: int = 1,
) -> PathEnsemble:
    """Z^n on ``grid`` for ``replicas`` independent replicas.

    Replica r uses noise from ``derived_rng(cfg.seed, r)``; chunks are fixed
    so the output is identical for every worker count.  If ``schedule`` is
    given it sets a_n = schedule.a(cfg.n), otherwise cfg.a_n is used as is.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if schedule is not None:
        cfg = replace(cfg, a_n=schedule.a(cfg.n))
    grid = np.asarray(grid, dtype=float)
    n = cfg.n
    N = n + 1
    if psi is None:
        psi = psi_sequence(cfg.kernel, cfg.a_n, N)
    _check_psi(cfg, N, psi)
    k, frac = _split_t(n, grid)
    scale = (1.0 - cfg.a_n) / math.sqrt(n)

    def run(rng_range):
        lo, hi = rng_range
        eps = np.stack([draw_noise(derived_rng(cfg.seed, r), N + 1, cfg.noise) for r in range(lo, hi)])
        y = _ma(psi.values, eps)
        cs = np.cumsum(y, axis=1)
        return scale * (cs[:, k] + frac * y[:, np.minimum(k + 1, N)])

    parts = ordered_map(run, chunk_ranges(replicas, CHUNK), workers)
    meta = {
        "kind": "donsker",
        "kernel": cfg.kernel.to_dict(),
        "a_n": cfg.a_n,
        "n": n,
        "noise": cfg.noise,
        "replicas": replicas,
        "master_seed": cfg.seed,
    }
    return PathEnsemble(grid, np.concatenate(parts), meta)


def with_noise(cfg: ArConfig, noise: str) -> ArConfig:
    return replace(cfg, noise=noise)
