"""Command-line entry point.

Data goes to ``--out`` (or stdout), diagnostics to stderr.  Exit codes:
0 success / all checks passed, 1 a check failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .convseries import SeriesError, psi_sequence
from .kernel import KernelError, Kernel, kernel_from_json, power_law_kernel
from .limitlab import LimitError, brownian, fractional, integrated_ou, sample_limit
from .mlf import MlfParams, mittag_leffler, ml_cdf, ml_density, ml_laplace
from .pathsim import (
    NOISES,
    ArConfig,
    ScheduleError,
    donsker_ensemble,
    heavy_schedule,
    light_schedule,
    uniform_grid,
)
from .verify.report import _clean
from .verify.suite import GROUPS, ConfigError, profile_names, resolve_profile, run_group

OUTPUT_DIR_ENV = "NUAR_OUTPUT_DIR"


class UsageError(Exception):
    pass


def config_hash(cfg: dict[str, Any]) -> str:
    blob = json.dumps(_clean(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def provenance(command: str, cfg: dict[str, Any], seed, derived: dict[str, Any] | None = None) -> dict[str, Any]:
    """Header record; ``config`` is a valid ``--config`` file for the same command."""
    d = {"tool": "nuar", "version": __version__, "command": command, "seed": seed,
         "config_sha256": config_hash(cfg), "config": _clean(cfg)}
    if derived:
        d["derived"] = _clean(derived)
    return d


_NOT_CONFIG = {"out", "format", "config", "workers", "func", "command", "group", "quiet", "timings"}


def _flags(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}


def _out_path(out: str | None) -> Path | None:
    if out is None or out == "-":
        return None
    p = Path(out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _write(text: str, out: str | None) -> None:
    p = _out_path(out)
    if p is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _fmt(out: str | None, fmt: str | None) -> str:
    if fmt:
        return fmt
    if out and out.endswith(".json"):
        return "json"
    return "csv"


def _csv_table(header, rows, prov: dict) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(prov, sort_keys=True, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([x if isinstance(x, (int, np.integer)) else repr(float(x)) for x in r])
    return buf.getvalue()


def _load_config(path: str | None, allowed: set[str]) -> dict[str, Any]:
    if not path:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("--config must hold a JSON object")
    extra = set(cfg) - allowed
    if extra:
        raise UsageError(f"--config: unknown keys {sorted(extra)}")
    return cfg


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Config-file values fill in flags that were not given on the command line.

    Keys may be flag names (``grid-points``, ``lambda``) or their dests (``grid_points``, ``lam``).
    """
    skip = {"help", "config", "command", "func"}
    names: dict[str, str] = {}
    for a in parser._actions:
        if a.dest in skip:
            continue
        names[a.dest] = a.dest
        for opt in a.option_strings:
            names[opt.lstrip("-")] = a.dest
    cfg = _load_config(getattr(args, "config", None), set(names))
    defaults = {a.dest: a.default for a in parser._actions}
    for key, val in cfg.items():
        dest = names[key]
        if getattr(args, dest) == defaults.get(dest):
            setattr(args, dest, val)


def _kernel_arg(text: str | None, regime: str | None = None, alpha: float | None = None) -> Kernel:
    if text is None:
        if regime == "heavy" and alpha is not None:
            return power_law_kernel(alpha)
        raise UsageError("--kernel is required")
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    return kernel_from_json(text)


def _schedule(kernel: Kernel, regime: str, lam: float, alpha: float | None):
    if regime == "light":
        if not kernel.light_tail:
            raise UsageError("--regime light needs a light-tailed kernel")
        return light_schedule(lam)
    if kernel.light_tail:
        raise UsageError("--regime heavy needs a power_law kernel")
    if alpha is not None and abs(alpha - kernel.tail_exponent) > 1e-15:
        raise UsageError(f"--alpha {alpha} disagrees with the kernel exponent {kernel.tail_exponent}")
    return heavy_schedule(kernel, lam)


def _ensemble_output(ens, args, command: str, derived: dict) -> None:
    prov = provenance(command, _flags(args), args.seed, derived)
    if _fmt(args.out, args.format) == "json":
        doc = {"provenance": prov, **ens.to_json()}
        _write(json.dumps(_clean(doc), sort_keys=True) + "\n", args.out)
    else:
        _write(_csv_table([repr(float(t)) for t in ens.grid], ens.paths, prov), args.out)


# -- subcommands ---------------------------------------------------------------

def cmd_simulate(args) -> int:
    kernel = _kernel_arg(args.kernel, args.regime, args.alpha)
    sched = _schedule(kernel, args.regime, args.lam, args.alpha)
    a = args.a if args.a is not None else sched.a(args.n)
    cfg = ArConfig(kernel, a, args.n, args.noise, args.seed)
    ens = donsker_ensemble(cfg, None, uniform_grid(args.grid_points), args.replicas, workers=args.workers)
    rec = {"kernel": kernel.to_dict(), "schedule": sched.to_dict(), "a_n": a}
    _ensemble_output(ens, args, "simulate", rec)
    return 0


def cmd_limit_sample(args) -> int:
    if args.law == "ou":
        if args.kappa is not None:
            kappa = args.kappa
        else:
            kappa = args.lam / _kernel_arg(args.kernel).mean
        law = integrated_ou(kappa)
    elif args.law == "frac":
        if args.alpha is None:
            raise UsageError("--law frac needs --alpha")
        law = fractional(args.alpha, args.lam)
    else:
        law = brownian()
    ens = sample_limit(law, args.grid_points, args.replicas, args.seed, args.workers)
    rec = {"law": law.to_dict(), "jitter": ens.meta["jitter"]}
    _ensemble_output(ens, args, "limit-sample", rec)
    return 0


def cmd_psi(args) -> int:
    kernel = _kernel_arg(args.kernel, args.regime, args.alpha)
    if args.a is not None:
        a = args.a
    elif args.regime and args.n:
        a = _schedule(kernel, args.regime, args.lam, args.alpha).a(args.n)
    else:
        raise UsageError("give --a, or --regime with --n")
    psi = psi_sequence(kernel, a, args.length)
    rec = {"kernel": kernel.to_dict(), "a_n": a}
    rows = zip(range(psi.length + 1), psi.values, psi.normalized_cdf)
    _write(_csv_table(["index", "psi_value", "partial_sum_normalized"], rows, provenance("psi", _flags(args), None, rec)), args.out)
    return 0


def _parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive, evenly spaced) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError("--grid must be start:stop:count or a comma list")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise UsageError(f"cannot parse --grid {text!r}") from None
        if count < 1:
            raise UsageError("--grid count must be >= 1")
        if count == 1:
            if start != stop:
                raise UsageError("--grid with count 1 needs start == stop")
            return np.array([start])
        return np.linspace(start, stop, count)
    return np.array([float(x) for x in text.split(",")])


def cmd_ml_eval(args) -> int:
    x = _parse_grid(args.grid)
    if args.what == "ml":
        beta = args.beta if args.beta is not None else 1.0
        vals = mittag_leffler(args.alpha, beta, x)
    else:
        p = MlfParams(args.alpha, args.lam)
        vals = {"density": ml_density, "cdf": ml_cdf, "laplace": ml_laplace}[args.what](p, x)
    rows = list(zip(x, np.atleast_1d(vals)))
    _write(_csv_table(["x", "value"], rows, provenance("ml-eval", _flags(args), None)), args.out)
    return 0


def _overrides(args) -> dict | None:
    cfg = _load_config(args.config, {"profile", "seed", "checks"})
    if "profile" in cfg and args.profile == "default":
        args.profile = cfg["profile"]
    if "seed" in cfg and args.seed == 0:
        args.seed = int(cfg["seed"])
    return cfg.get("checks")


def cmd_verify(args) -> int:
    overrides = _overrides(args)
    t0 = time.perf_counter()
    log = (lambda s: print(s, file=sys.stderr)) if not args.quiet else None
    reports = run_group(args.group, args.profile, args.seed, args.workers, overrides, args.only, log)
    passed = all(r.passed for r in reports)
    rec = {"profile": args.profile, "seed": args.seed, "checks": overrides or {}}
    resolved = resolve_profile(args.profile, overrides)
    derived = {"checks_run": [r.check_id for r in reports], "resolved_sha256": config_hash(resolved)}
    doc = {
        "provenance": provenance(f"verify-{args.group}", rec, args.seed, derived),
        "passed": passed,
        "reports": [r.to_dict(args.timings) for r in reports],
    }
    _write(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    if log:
        log(f"{'PASS' if passed else 'FAIL'} verify-{args.group}: "
            f"{sum(r.passed for r in reports)}/{len(reports)} checks passed in {time.perf_counter() - t0:.1f}s")
    return 0 if passed else 1


# -- parser ----------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--out", default=None, help=f"output file (relative paths resolve under ${OUTPUT_DIR_ENV}); stdout if omitted")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--config", default=None, help="JSON file with flag values; unknown keys are errors")
    p.add_argument("--workers", type=int, default=1)
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nuar", description="Nearly unstable AR(inf) processes and their limits.")
    ap.add_argument("--version", action="version", version=f"nuar {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Donsker lines Z^n of simulated AR paths")
    p.add_argument("--kernel", help='kernel JSON, e.g. \'{"family":"geometric","p":0.5}\' (or @file)')
    p.add_argument("--regime", choices=("light", "heavy"), default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--a", type=float, default=None, help="override a_n")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--grid-points", type=int, default=100)
    p.add_argument("--noise", choices=NOISES, default="gaussian")
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("limit-sample", help="exact Gaussian samples of the limit processes")
    p.add_argument("--law", choices=("ou", "frac", "brownian"), default=None)
    p.add_argument("--kernel", help="light kernel JSON; kappa = lambda / mean")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--grid-points", type=int, default=100)
    _common(p)
    p.set_defaults(func=cmd_limit_sample)

    p = sub.add_parser("psi", help="convolution series psi_0..psi_L")
    p.add_argument("--kernel")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--regime", choices=("light", "heavy"), default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--length", type=int, default=None)
    _common(p, seed=False)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("ml-eval", help="Mittag-Leffler function and law on a grid")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--what", choices=("density", "cdf", "laplace", "ml"), default="cdf")
    p.add_argument("--grid", default=None, help="start:stop:count (inclusive) or comma list")
    _common(p, seed=False)
    p.set_defaults(func=cmd_ml_eval)

    for group in ("light", "heavy", "scaling", "regularity", "all"):
        p = sub.add_parser(f"verify-{group}", help=f"run the {group} verification checks")
        p.add_argument("--profile", choices=profile_names(), default="default")
        p.add_argument("--only", nargs="+", choices=GROUPS[group], default=None)
        p.add_argument("--timings", action="store_true", help="include runtime_sec in the JSON reports")
        p.add_argument("--quiet", action="store_true")
        _common(p)
        p.set_defaults(func=cmd_verify, group=group)
    return ap


# flags that must be set on the command line or in --config
_REQUIRED = {
    "simulate": ("regime", "n"),
    "limit-sample": ("law",),
    "psi": ("length",),
    "ml-eval": ("alpha", "grid"),
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in _REQUIRED:
        try:
            _apply_config(args, parser._subparsers._group_actions[0].choices[args.command])
            missing = [f"--{d.replace('_', '-')}" for d in _REQUIRED[args.command] if getattr(args, d) is None]
            if missing:
                raise UsageError(f"missing required flag(s): {' '.join(missing)}")
        except UsageError as exc:
            print(f"nuar {args.command}: error: {exc}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (UsageError, ConfigError, KernelError, ScheduleError, SeriesError, LimitError, ValueError) as exc:
        print(f"nuar {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
