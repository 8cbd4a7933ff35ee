"""Command-line front end for the experiment drivers.

Subcommands: converge, cdf, compare-centralized, compare-distributed, check.
Exit codes: 0 on success, 2 on invalid arguments, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .beamforming import NumericalError
from .experiments import (
    ExperimentConfig,
    run_cdf,
    run_check,
    run_compare_centralized,
    run_compare_distributed,
    run_convergence,
)
from .network import SCENARIOS, NetworkConfig

_NETWORK_FIELDS = {f.name: f.type for f in dataclasses.fields(NetworkConfig)}
_EXPERIMENT_KEYS = {"n_drops": int, "master_seed": int, "jobs": int, "out_dir": str}


def _parse_config_file(path: str) -> dict:
    """key=value lines (int/float/str by field type); '#' starts a comment."""
    overrides = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected KEY=VALUE, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in _NETWORK_FIELDS:
                kind = _NETWORK_FIELDS[key]
                caster = int if kind in ("int", int) else float
                overrides[key] = caster(value)
            elif key in _EXPERIMENT_KEYS:
                overrides[key] = _EXPERIMENT_KEYS[key](value)
            else:
                raise ValueError(f"{path}:{lineno}: unknown configuration key {key!r}")
    return overrides


def _add_common(parser: argparse.ArgumentParser, default_drops: int) -> None:
    parser.add_argument("--profile", choices=("desk", "paper"), default="desk")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--drops", type=int, default=default_drops)
    parser.add_argument("--nsim", type=int, default=None, help="override training-set size")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--jobs", type=int, default=1, help="parallel drop workers")
    parser.add_argument(
        "--scenario",
        choices=SCENARIOS,
        default=None,
        help="restrict to one information scenario (default: all)",
    )
    parser.add_argument("--config", default=None, help="key=value file overriding defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfmimo",
        description="Long-term power control and beamforming experiments "
        "for cell-free massive MIMO networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("converge", help="fixed-point convergence traces (one drop)")
    p.add_argument("--problem", choices=("qos", "maxmin", "both"), default="both")
    _add_common(p, default_drops=1)
    _add_common(sub.add_parser("cdf", help="per-user rate CDF samples"), default_drops=20)
    _add_common(
        sub.add_parser("compare-centralized", help="centralized method comparison"),
        default_drops=20,
    )
    _add_common(
        sub.add_parser("compare-distributed", help="distributed method comparison"),
        default_drops=20,
    )
    _add_common(sub.add_parser("check", help="run the invariant suite"), default_drops=1)
    return parser


def _experiment_config(args, kind: str) -> ExperimentConfig:
    overrides = _parse_config_file(args.config) if args.config else {}
    exp_overrides = {k: overrides.pop(k) for k in list(overrides) if k in _EXPERIMENT_KEYS}
    profile = NetworkConfig.desk if args.profile == "desk" else NetworkConfig.paper
    if args.nsim is not None:
        overrides["n_sim"] = args.nsim
    network = profile(**overrides)
    scenarios = (args.scenario,) if args.scenario else SCENARIOS
    return ExperimentConfig(
        network=network,
        kind=kind,
        n_drops=exp_overrides.get("n_drops", args.drops),
        master_seed=exp_overrides.get("master_seed", args.seed),
        out_dir=exp_overrides.get("out_dir", args.out),
        profile=args.profile,
        scenarios=scenarios,
        jobs=exp_overrides.get("jobs", args.jobs),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "converge":
            problems = ("qos", "maxmin") if args.problem == "both" else (args.problem,)
            for problem in problems:
                cfg = _experiment_config(args, f"converge-{problem}")
                print(run_convergence(cfg))
        elif args.command == "cdf":
            print(run_cdf(_experiment_config(args, "cdf")))
        elif args.command == "compare-centralized":
            print(run_compare_centralized(_experiment_config(args, "compare-centralized")))
        elif args.command == "compare-distributed":
            print(run_compare_distributed(_experiment_config(args, "compare-distributed")))
        elif args.command == "check":
            checks = run_check(_experiment_config(args, "cdf"))
            if not all(ok for _, ok in checks):
                return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, AssertionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
