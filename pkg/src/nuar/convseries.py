"""Convolution series psi = sum_l (a phi)^{*l} and the geometric sums it encodes.

psi is computed from the renewal recursion

    psi_0 = 1,   psi_k = a * sum_{i=1}^k phi_i psi_{k-i},

which is exact in the series index l; the only approximation is the index
cutoff L.  Short sequences use the direct recursion, long ones with a wide
kernel support invert the power series 1 - a phi(x) by FFT Newton iteration.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .kernel import Kernel, _pareto_floor
from .seeding import chunk_ranges, derived_rng, ordered_map

# direct recursion while L * support stays under this many multiply-adds
DIRECT_BUDGET = 2**15 * 2**12
_FFT_MIN = 512
SAMPLE_CHUNK = 2**16


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class PsiSequence:
    values: np.ndarray
    a_n: float
    length: int
    kernel: Kernel | None = None
    mass_defect: float = 0.0
    _cum: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def partial_sums(self) -> np.ndarray:
        """Compensated partial sums sum_{i<=k} psi_i, k = 0..L."""
        return self._cum

    @property
    def normalized_cdf(self) -> np.ndarray:
        """(1 - a) * sum_{i<=k} psi_i, k = 0..L."""
        return (1.0 - self.a_n) * self._cum

    def sq_partial_sums(self) -> np.ndarray:
        """sum_{j<=k} psi_j^2 = E[y_k^2] for unit-variance noise."""
        return np.cumsum(np.square(self.values, dtype=np.longdouble)).astype(float)


def _check_a(a_n: float) -> None:
    if not 0.0 < a_n < 1.0:
        raise SeriesError(f"a_n must lie in (0, 1), got {a_n}")


def _direct(phi: np.ndarray, a: float, L: int) -> np.ndarray:
    psi = np.zeros(L + 1)
    psi[0] = 1.0
    aphi = a * phi
    S = len(aphi)
    for k in range(1, L + 1):
        m = min(k, S)
        psi[k] = aphi[:m] @ psi[k - m : k][::-1]
    return psi


def _newton(phi: np.ndarray, a: float, L: int) -> np.ndarray:
    """psi as the power-series reciprocal 1/(1 - a phi(x)), O(L log L).

    Newton doubling: if g = 1/f mod x^m then g - g (f g - 1) = 1/f mod x^2m,
    and f g - 1 vanishes below x^m so only its upper half is formed.  Both
    products fit in one cyclic transform of length >= 2m: wrap-around of
    f g only touches coefficients below m.
    """
    N = L + 1
    f = np.zeros(N)
    f[0] = 1.0
    m = min(N - 1, len(phi))
    f[1 : m + 1] = -a * phi[:m]
    g = np.ones(1)
    m = 1
    while m < N:
        m2 = min(2 * m, N)
        if (m2 - m) * m2 <= 2**22:
            # short remainder: finish with the recursion psi_k = sum_i (-f_i) psi_{k-i}
            g = np.concatenate([g, np.zeros(m2 - m)])
            for k in range(m, m2):
                g[k] = -(f[1 : k + 1] @ g[k - 1 :: -1])
        elif m < _FFT_MIN:
            h = np.convolve(f[:m2], g)[m:m2]
            g = np.concatenate([g, -np.convolve(g, h)[: m2 - m]])
        else:
            nf = sfft.next_fast_len(m2, real=True)
            G = sfft.rfft(g, nf)
            h = sfft.irfft(sfft.rfft(f[:m2], nf) * G, nf)[m:m2]
            g = np.concatenate([g, -sfft.irfft(G * sfft.rfft(h, nf), nf)[: m2 - m]])
        m = m2
    return g


def psi_sequence(k: Kernel, a_n: float, L: int, method: str = "auto") -> PsiSequence:
    """psi_0..psi_L for kernel ``k`` scaled by ``a_n``.

    ``method`` is ``"direct"``, ``"fft"`` or ``"auto"``.
    """
    _check_a(a_n)
    if L < 1:
        raise SeriesError(f"length must be >= 1, got {L}")
    phi, defect = k.coeffs(L)
    nz = np.flatnonzero(phi)
    phi = phi[: nz[-1] + 1] if nz.size else phi[:1]
    if method == "auto":
        method = "direct" if L * len(phi) <= DIRECT_BUDGET else "fft"
    if method == "direct":
        psi = _direct(phi, a_n, L)
    elif method == "fft":
        psi = _newton(phi, a_n, L)
    else:
        raise SeriesError(f"unknown method {method!r}")
    np.maximum(psi, 0.0, out=psi)
    cum = np.cumsum(psi.astype(np.longdouble)).astype(float)
    psi.setflags(write=False)
    cum.setflags(write=False)
    return PsiSequence(psi, float(a_n), int(L), k, defect, cum)


def explicit_series(phi: np.ndarray, a: float, L: int, l_max: int) -> np.ndarray:
    """Brute-force sum_{l<=l_max} (a phi)^{*l} truncated to indices 0..L."""
    base = np.zeros(L + 1)
    base[1 : min(L, len(phi)) + 1] = a * np.asarray(phi)[:L]
    term = np.zeros(L + 1)
    term[0] = 1.0
    total = term.copy()
    for _ in range(l_max):
        term = np.convolve(term, base)[: L + 1]
        total += term
    return total


def psi_cdf(psi: PsiSequence, n: int, x):
    """F^n(x) = (1 - a_n) sum_{i <= floor(n x)} psi_i."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise SeriesError("x must lie in [0, 1]")
    idx = np.floor(n * x + 1e-12).astype(np.int64)
    if np.any(idx > psi.length):
        raise SeriesError(f"psi of length {psi.length} too short for floor(n x) = {idx.max()}")
    out = psi.normalized_cdf[idx]
    return float(out) if out.ndim == 0 else out


def geosum_pmf(psi: PsiSequence, i):
    """P[Y^n = i] = (1 - a_n) psi_i."""
    i = np.asarray(i)
    if np.any(i < 0) or np.any(i > psi.length):
        raise SeriesError(f"index out of range [0, {psi.length}]")
    out = (1.0 - psi.a_n) * psi.values[i]
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GeometricSumSampler:
    """Y = X^1 + ... + X^I with P[I = i] = a^i (1 - a) and X ~ phi."""

    kernel: Kernel
    a_n: float

    def __post_init__(self):
        _check_a(self.a_n)

    def counts(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.geometric(1.0 - self.a_n, size).astype(np.int64) - 1

    def _draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        k = self.kernel
        I = self.counts(rng, size)
        if k.family == "finite":
            w = np.asarray(k.weights)
            cnt = rng.multinomial(I, w / w.sum())
            return cnt @ np.arange(1, len(w) + 1, dtype=np.int64)
        if k.family == "geometric":
            if k.p == 0.0:
                return I
            # sum of I geometric(1-p) jumps on {1,2,..} = I + NegBin(I, 1-p) failures
            Y = I.copy()
            pos = I > 0
            Y[pos] += rng.negative_binomial(I[pos], 1.0 - k.p)
            return Y
        J = I if k.weight == 1.0 else rng.binomial(I, k.weight)
        Y = (I - J).astype(float)
        total = int(J.sum())
        if total:
            x = _pareto_floor(rng, k.alpha, total).astype(float)
            owner = np.repeat(np.arange(size), J)
            Y += np.bincount(owner, weights=x, minlength=size)
        return np.minimum(Y, 2.0**62).astype(np.int64)


def sample_geosum(s: GeometricSumSampler, count: int, seed: int, workers: int = 1) -> np.ndarray:
    """``count`` iid draws of Y^n; identical for any ``workers``."""
    ranges = chunk_ranges(count, SAMPLE_CHUNK)
    parts = ordered_map(lambda r: s._draw(derived_rng(seed, r[0] // SAMPLE_CHUNK), r[1] - r[0]), ranges, workers)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
