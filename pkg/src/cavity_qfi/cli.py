"""``cavity-qfi`` command line: figure data, parameter sweeps and self-checks."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .errors import CavityQfiError, IoFailure, SpecValidation
from .sweep import (
    FORMATS,
    PROVIDERS,
    SweepSpec,
    fig1_spec,
    fig2_spec,
    fig3_spec,
    run_sweep,
    serialize,
    u_grid,
    write_output,
)

# config-file keys accepted by --config; each mirrors a flag
CONFIG_KEYS = ("family", "h", "u_min", "u_max", "u_step", "theta", "r", "s", "k",
               "provider", "seed", "n_trunc", "format", "out", "workers")


def _common(p: argparse.ArgumentParser, provider_default: str) -> None:
    p.add_argument("--h", type=float, help="perturbation parameter h (default 0.01)")
    p.add_argument("--u-min", type=float, dest="u_min")
    p.add_argument("--u-max", type=float, dest="u_max")
    p.add_argument("--u-step", type=float, dest="u_step")
    p.add_argument("--theta", type=float, action="append", help="weight parameter, repeatable")
    p.add_argument("--r", type=float, action="append", help="Werner mixing, repeatable")
    p.add_argument("--s", type=float, action="append", help="boundary phase s, repeatable")
    p.add_argument("--k", type=int, action="append", help="Rob's reference mode, repeatable")
    p.add_argument("--provider", choices=PROVIDERS, help=f"coefficient backend (default {provider_default})")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-trunc", type=int, dest="n_trunc")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out", help="output path; stdout when omitted")
    p.add_argument("--config", help="JSON file with default values; flags override it")
    p.add_argument("--workers", type=int, help="worker processes (row order is unaffected)")
    p.set_defaults(provider_default=provider_default)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cavity-qfi", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("fig1", "Rob's QFI for the pure state vs u"),
                       ("fig2", "Werner-state QFI vs u for several s, k"),
                       ("fig3", "Werner-state QFI vs u for several r")):
        _common(sub.add_parser(name, help=text), "quadrature")
    sw = sub.add_parser("sweep", help="general grid sweep")
    _common(sw, "synthetic")
    sw.add_argument("--family", choices=("pure", "werner"))
    vf = sub.add_parser("verify", help="run the self-check suite and print a JSON report")
    vf.add_argument("--level", choices=("fast", "full"), default="fast")
    vf.add_argument("--out", help="write the report here as well as to stdout")
    return ap


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecValidation(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecValidation("config file must hold a JSON object")
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise SpecValidation(f"unknown config keys: {sorted(unknown)}")
    return data


def _as_list(x) -> Optional[list]:
    if x is None:
        return None
    return list(x) if isinstance(x, (list, tuple)) else [x]


def resolve(args: argparse.Namespace) -> tuple[SweepSpec, int]:
    """Merge built-in defaults, the config file and the flags (in rising priority)."""
    cfg = _load_config(getattr(args, "config", None))

    def pick(name, default=None):
        val = getattr(args, name, None)
        if val is not None:
            return val
        return cfg.get(name, default)

    h = float(pick("h", 0.01))
    provider = pick("provider", args.provider_default)
    base = {"fig1": fig1_spec, "fig2": fig2_spec, "fig3": fig3_spec}.get(args.command)
    spec = base(provider=provider, h=h) if base else SweepSpec(family=pick("family", "pure"), provider=provider, h=h)

    u = u_grid(float(pick("u_min", 0.0)), float(pick("u_max", 1.0)), float(pick("u_step", 0.01)))
    overrides = {"u": tuple(u)}
    for axis, cast in (("theta", float), ("r", float), ("s", float), ("k", int)):
        vals = _as_list(pick(axis))
        if vals is not None:
            overrides[axis] = tuple(cast(v) for v in vals)
    if args.command == "sweep" and spec.family == "werner" and "r" not in overrides:
        overrides["r"] = (1 / 3,)
    for name in ("seed", "n_trunc"):
        val = pick(name)
        if val is not None:
            overrides[name] = int(val)
    overrides["format"] = pick("format", "csv")
    overrides["out"] = pick("out")
    spec = replace(spec, **overrides)
    workers = int(pick("workers", 1) or 1)
    return spec.validate(), workers


def _run_verify(args) -> int:
    from .verification import run_checks

    report = run_checks(args.level)
    text = json.dumps(report, indent=1) + "\n"
    sys.stdout.write(text)
    if args.out:
        write_output(text, args.out)
    return 0 if report["passed"] else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return _run_verify(args)
        spec, workers = resolve(args)
        rows = run_sweep(spec, workers=workers)
        write_output(serialize(rows, spec.format), spec.out)
        return 0
    except SpecValidation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CavityQfiError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
