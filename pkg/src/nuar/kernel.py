"""Coefficient shapes phi for nearly unstable AR(inf) processes.

A kernel is a probability law on {1, 2, ...}: phi_0 = 0, phi_i >= 0 and
sum phi_i = 1.  Three families are provided:

* ``finite``     -- normalised weights, the AR(p) case;
* ``geometric``  -- phi_i = (1-p) p^(i-1), light tail with mean 1/(1-p);
* ``power_law``  -- telescoped Pareto phi_i = i^-a - (i+1)^-a, whose tail
  sum_{i>=N} phi_i = N^-a holds exactly.  An optional ``weight`` theta mixes
  it with the unit atom at 1, giving tail constant K = theta.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Any

import numpy as np

FAMILIES = ("finite", "geometric", "power_law")


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class Kernel:
    family: str
    weights: tuple[float, ...] = ()
    p: float = 0.0
    alpha: float | None = None
    weight: float = 1.0

    @property
    def mean(self) -> float:
        """m = sum i phi_i; +inf for power-law kernels."""
        if self.family == "finite":
            return float(sum((i + 1) * w for i, w in enumerate(self.weights)))
        if self.family == "geometric":
            return 1.0 / (1.0 - self.p)
        return math.inf

    @property
    def light_tail(self) -> bool:
        return self.family != "power_law"

    @property
    def tail_exponent(self) -> float | None:
        return self.alpha if self.family == "power_law" else None

    @property
    def tail_constant(self) -> float | None:
        """K in sum_{i>=N} phi_i ~ K N^-alpha (exact for N >= 2)."""
        return self.weight if self.family == "power_law" else None

    @property
    def support(self) -> int | None:
        """Largest index with phi_i > 0, or None if unbounded."""
        if self.family == "finite":
            return len(self.weights)
        if self.family == "geometric" and self.p == 0.0:
            return 1
        return None

    def tail(self, N: int | np.ndarray) -> np.ndarray:
        """Analytic tail mass sum_{i>=N} phi_i for N >= 1."""
        N = np.asarray(N)
        if np.any(N < 1):
            raise KernelError("tail is defined for N >= 1")
        if self.family == "finite":
            cum = np.concatenate([[0.0], np.cumsum(self.weights)])
            idx = np.minimum(N - 1, len(self.weights))
            return np.maximum(1.0 - cum[idx], 0.0)
        if self.family == "geometric":
            return self.p ** (N - 1.0)
        out = self.weight * np.power(N.astype(float), -self.alpha)
        return np.where(N == 1, 1.0, out)

    def coeffs(self, L: int) -> tuple[np.ndarray, float]:
        """phi_1..phi_L and the mass defect 1 - sum_{i<=L} phi_i."""
        if L < 1:
            raise KernelError(f"truncation length must be >= 1, got {L}")
        i = np.arange(1, L + 1, dtype=float)
        if self.family == "finite":
            phi = np.zeros(L)
            m = min(L, len(self.weights))
            phi[:m] = self.weights[:m]
        elif self.family == "geometric":
            phi = (1.0 - self.p) * self.p ** (i - 1.0)
        else:
            # i^-a (1 - (1 + 1/i)^-a) without cancellation
            phi = self.weight * i ** -self.alpha * -np.expm1(-self.alpha * np.log1p(1.0 / i))
            phi[0] += 1.0 - self.weight
        return phi, float(self.tail(L + 1))

    def fourier(self, z, L: int, tol: float = 1e-3) -> np.ndarray:
        """Truncated transform sum_{k<=L} phi_k exp(-2 pi i k z)."""
        phi, defect = self.coeffs(L)
        if defect > tol:
            warnings.warn(
                f"kernel truncated at L={L} leaves mass defect {defect:.3g} > {tol:g}",
                RuntimeWarning,
                stacklevel=2,
            )
        z = np.asarray(z, dtype=float)
        k = np.arange(1, L + 1)
        out = np.exp(-2j * np.pi * np.multiply.outer(z, k)) @ phi
        return out

    def sample_jumps(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw iid X with P[X = i] = phi_i (int64; capped at 2^62)."""
        if self.family == "finite":
            cdf = np.cumsum(self.weights)
            cdf[-1] = 1.0
            return np.searchsorted(cdf, rng.random(size), side="right").astype(np.int64) + 1
        if self.family == "geometric":
            if self.p == 0.0:
                return np.ones(size, dtype=np.int64)
            return rng.geometric(1.0 - self.p, size).astype(np.int64)
        x = _pareto_floor(rng, self.alpha, size)
        if self.weight < 1.0:
            x = np.where(rng.random(size) < self.weight, x, 1)
        return x

    def to_dict(self) -> dict[str, Any]:
        if self.family == "finite":
            return {"family": "finite", "weights": list(self.weights)}
        if self.family == "geometric":
            return {"family": "geometric", "p": self.p}
        d: dict[str, Any] = {"family": "power_law", "alpha": self.alpha}
        if self.weight != 1.0:
            d["weight"] = self.weight
        return d


_INT_CAP = 2.0**62


def _pareto_floor(rng: np.random.Generator, alpha: float, size: int) -> np.ndarray:
    # P[floor(U^(-1/a)) >= N] = P[U <= N^-a] = N^-a for U uniform on (0, 1]
    u = 1.0 - rng.random(size)
    x = np.floor(np.exp(-np.log(u) / alpha))
    return np.minimum(x, _INT_CAP).astype(np.int64)


def geometric_kernel(p: float) -> Kernel:
    if not 0.0 <= p < 1.0:
        raise KernelError(f"geometric kernel needs 0 <= p < 1, got {p}")
    return Kernel("geometric", p=float(p))


def finite_kernel(weights) -> Kernel:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise KernelError("weights must be a non-empty 1-d sequence")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise KernelError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise KernelError("at least one weight must be positive")
    w = w / total
    last = int(np.flatnonzero(w)[-1])
    return Kernel("finite", weights=tuple(float(x) for x in w[: last + 1]))


def power_law_kernel(alpha: float, weight: float = 1.0) -> Kernel:
    """Telescoped Pareto kernel; ``weight`` < 1 mixes in the atom at 1."""
    if not 0.0 < alpha < 1.0:
        raise KernelError(f"power-law kernel needs 0 < alpha < 1, got {alpha}")
    if not 0.0 < weight <= 1.0:
        raise KernelError(f"mixture weight must lie in (0, 1], got {weight}")
    return Kernel("power_law", alpha=float(alpha), weight=float(weight))


def kernel_coeffs(k: Kernel, L: int) -> tuple[np.ndarray, float]:
    return k.coeffs(L)


def kernel_fourier(k: Kernel, z, L: int, tol: float = 1e-3):
    return k.fourier(z, L, tol)


_ALLOWED_KEYS = {
    "finite": {"family", "weights"},
    "geometric": {"family", "p"},
    "power_law": {"family", "alpha", "weight"},
}


def kernel_from_dict(d: dict[str, Any]) -> Kernel:
    family = d.get("family")
    if family not in _ALLOWED_KEYS:
        raise KernelError(f"unknown kernel family {family!r}; expected one of {FAMILIES}")
    extra = set(d) - _ALLOWED_KEYS[family]
    if extra:
        raise KernelError(f"unknown keys for {family} kernel: {sorted(extra)}")
    try:
        if family == "finite":
            return finite_kernel(d["weights"])
        if family == "geometric":
            return geometric_kernel(float(d["p"]))
        return power_law_kernel(float(d["alpha"]), float(d.get("weight", 1.0)))
    except KeyError as exc:
        raise KernelError(f"{family} kernel is missing key {exc.args[0]!r}") from None


def kernel_from_json(text: str) -> Kernel:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KernelError(f"kernel description is not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise KernelError("kernel description must be a JSON object")
    return kernel_from_dict(d)
