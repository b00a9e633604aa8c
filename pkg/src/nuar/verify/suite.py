"""Named tolerance profiles and the runner behind the ``verify-*`` commands."""
from __future__ import annotations

import copy
import json
from importlib import resources
from typing import Any, Iterable

from ..kernel import Kernel, kernel_from_dict
from ..pathsim import Schedule, heavy_schedule, light_schedule
from . import checks
from .report import VerificationReport

GROUPS = {
    "light": ("geosum_light", "psi_cdf_light", "donsker_light"),
    "heavy": ("geosum_heavy", "psi_cdf_heavy", "donsker_heavy"),
    "scaling": ("scaling_light", "scaling_alpha_0.75", "scaling_alpha_0.25", "scaling_alpha_0.5",
                "offdiag_alpha_0.25", "offdiag_light"),
    "regularity": ("increment_light", "increment_alpha_0.25", "hurst_driver", "hurst_limit", "hurst_brownian"),
}
GROUPS["all"] = GROUPS["light"] + GROUPS["heavy"] + GROUPS["scaling"] + GROUPS["regularity"] + ("special_functions",)

# accepted keys per check type
_KEYS = {
    "geosum_light": {"check", "kernel", "lambda", "n_list", "samples_per_n", "tol"},
    "geosum_heavy": {"check", "alpha", "lambda", "n_list", "samples_per_n", "tol", "laplace_z", "delta"},
    "psi_cdf": {"check", "kernel", "lambda", "n_list", "tol", "grid"},
    "donsker": {"check", "kernel", "lambda", "n_list", "grid_points", "replicas", "tol", "ks_tol", "noises", "pairs"},
    "scaling": {"check", "kernel", "lambda", "n_list", "k_frac", "replicas", "tol_exact", "tol_mc"},
    "offdiag": {"check", "kernel", "lambda", "n", "lags", "replicas", "tol"},
    "increment": {"check", "kernel", "lambda", "n", "pairs", "replicas", "tol"},
    "hurst": {"check", "source", "alpha", "lambda", "G", "replicas", "scale_range", "expected", "tol"},
    "special_functions": {"check", "tol_exact", "tol_identity", "tol_cdf", "tol_small"},
}


class ConfigError(ValueError):
    pass


def load_profiles() -> dict[str, Any]:
    text = resources.files(__package__).joinpath("profiles.json").read_text()
    return json.loads(text)


def profile_names() -> list[str]:
    return sorted(load_profiles()["profiles"])


def resolve_profile(name: str, overrides: dict[str, dict] | None = None) -> dict[str, dict]:
    """Full per-check parameters: default, then the named profile, then ``overrides``."""
    profiles = load_profiles()["profiles"]
    if name not in profiles:
        raise ConfigError(f"unknown profile {name!r}; expected one of {sorted(profiles)}")
    cfg = copy.deepcopy(profiles["default"])
    for layer in (profiles[name], overrides or {}):
        for cid, params in layer.items():
            if cid not in cfg:
                raise ConfigError(f"unknown check {cid!r}")
            cfg[cid].update(copy.deepcopy(params))
    for cid, params in cfg.items():
        extra = set(params) - _KEYS[params["check"]]
        if extra:
            raise ConfigError(f"unknown keys for check {cid!r}: {sorted(extra)}")
    return cfg


def _kernel(p: dict) -> Kernel:
    return kernel_from_dict(p["kernel"])


def _schedule(kernel: Kernel, lam: float) -> Schedule:
    return light_schedule(lam) if kernel.light_tail else heavy_schedule(kernel, lam)


def run_check(check_id: str, p: dict, seed: int, workers: int = 1) -> VerificationReport:
    kind = p["check"]
    if kind == "geosum_light":
        r = checks.verify_geosum_light(_kernel(p), p["lambda"], p["n_list"], p["samples_per_n"], seed, p["tol"], workers)
    elif kind == "geosum_heavy":
        r = checks.verify_geosum_heavy(p["alpha"], p["lambda"], p["n_list"], p["samples_per_n"], seed, p["tol"],
                                       tuple(p.get("laplace_z", (1.0, 2.0))), p.get("delta"), workers)
    elif kind == "psi_cdf":
        k = _kernel(p)
        r = checks.verify_psi_cdf(k, _schedule(k, p["lambda"]), p["n_list"], p.get("grid"), p["tol"])
    elif kind == "donsker":
        k = _kernel(p)
        pairs = tuple(tuple(x) for x in p.get("pairs", ((0.25, 0.5), (0.5, 1.0), (0.25, 1.0))))
        r = checks.verify_donsker(k, _schedule(k, p["lambda"]), p["n_list"], p["grid_points"], p["replicas"], seed,
                                  pairs, p["tol"], p["ks_tol"], tuple(p["noises"]), workers)
    elif kind == "scaling":
        k = _kernel(p)
        r = checks.scaling_exponent(k, _schedule(k, p["lambda"]), p["n_list"], p["k_frac"], p["replicas"], seed,
                                    p["tol_exact"], p["tol_mc"], workers)
    elif kind == "offdiag":
        k = _kernel(p)
        r = checks.verify_offdiag_decay(k, _schedule(k, p["lambda"]), p["n"], p["lags"], p["replicas"], seed,
                                        p["tol"], workers)
    elif kind == "increment":
        k = _kernel(p)
        r = checks.verify_increment_bound(k, _schedule(k, p["lambda"]), p["n"], p.get("pairs"), p["replicas"], seed,
                                          p["tol"], workers)
    elif kind == "hurst":
        r = checks.verify_hurst(p["source"], p["G"], p["replicas"], seed, p["scale_range"], p["expected"], p["tol"],
                                p.get("alpha"), p.get("lambda", 1.0), workers)
    elif kind == "special_functions":
        r = checks.verify_special_functions(p["tol_exact"], p["tol_identity"], p["tol_cdf"], p["tol_small"])
    else:
        raise ConfigError(f"unknown check type {kind!r}")
    r.check_id = check_id
    return r


def run_group(group: str, profile: str = "default", seed: int = 0, workers: int = 1,
              overrides: dict | None = None, only: Iterable[str] | None = None,
              log=None) -> list[VerificationReport]:
    if group not in GROUPS:
        raise ConfigError(f"unknown group {group!r}")
    cfg = resolve_profile(profile, overrides)
    ids = [c for c in GROUPS[group] if only is None or c in set(only)]
    out = []
    for cid in ids:
        r = run_check(cid, cfg[cid], seed, workers)
        if log is not None:
            log(f"{r.summary()} ({r.runtime_sec:.1f}s)")
        out.append(r)
    return out
