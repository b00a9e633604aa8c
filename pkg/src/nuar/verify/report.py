from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def _clean(x):
    """JSON-safe copy: numpy scalars to python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


@dataclass
class VerificationReport:
    check_id: str
    params: dict[str, Any]
    n_values: list[int]
    per_n: list[dict[str, Any]]
    fitted_exponent: float | None
    tolerance: float
    passed: bool
    seed: dict[str, Any]
    runtime_sec: float = 0.0
    notes: list[str] = field(default_factory=list)

    def to_dict(self, timings: bool = False) -> dict[str, Any]:
        d = {
            "check_id": self.check_id,
            "params": self.params,
            "n_values": self.n_values,
            "per_n": self.per_n,
            "fitted_exponent": self.fitted_exponent,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "seed": self.seed,
        }
        if self.notes:
            d["notes"] = self.notes
        # wall time breaks byte-identical reruns, so it is null unless asked for
        d["runtime_sec"] = self.runtime_sec if timings else None
        return _clean(d)

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=True)

    def summary(self) -> str:
        exp = "" if self.fitted_exponent is None else f" exponent={self.fitted_exponent:.4f}"
        return f"{'PASS' if self.passed else 'FAIL'} {self.check_id}{exp} tol={self.tolerance:g}"
