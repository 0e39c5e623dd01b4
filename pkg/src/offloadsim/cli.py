"""Command-line runner for the offloading experiments.

Exit status: 0 on success, 1 if an invariant check failed, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import ConfigError, ExperimentConfig, run_experiment, write_output
from .model import SystemParams
from .scenario import parse_model

SUBCOMMANDS = {
    "gap-vs-n": "gap_vs_n",
    "threshold-sweep": "threshold_sweep",
    "optimality-count": None,
    "fading": "fading_comparison",
    "sic-benefit": "sic_benefit",
    "invariants": "invariants",
}
DEFAULT_N = {
    "gap_vs_n": [2, 4, 6, 8, 10, 12, 14, 16],
    "threshold_sweep": [2, 4, 8, 12, 16],
    "invariants": [10],
}
DEFAULT_TRIALS = {"invariants": 500}
PARAM_KEYS = ("lam", "mu", "power", "noise_bs", "noise_ap")


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="offloadsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="flat JSON file of settings; flags override it")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--trials", type=int)
        p.add_argument("--n", type=_int_list, help="user counts, e.g. '2,4,6'")
        p.add_argument("--jobs", type=int, help="worker processes")
        p.add_argument("--output", help="output file (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--dump-assignments", action="store_true", default=None)
        p.add_argument("--model", help="pathloss[:alpha=..,gamma=..], rayleigh[:mean=..], nakagami[:m=..,mean=..]")
        p.add_argument("--sweep", type=_float_list, help="threshold or power values")
        for key in PARAM_KEYS:
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
        if name == "optimality-count":
            p.add_argument("--problem", choices=("no_sic", "sic_bs"))
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    settings = {}
    if args.config is not None:
        try:
            settings = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(settings, dict):
            raise ConfigError("config file must hold a flat JSON object")
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "command")}
    settings.update(flags)

    experiment = SUBCOMMANDS[args.command]
    if experiment is None:
        problem = settings.pop("problem", None)
        if problem not in ("no_sic", "sic_bs"):
            raise ConfigError("optimality-count needs --problem no_sic or sic_bs")
        experiment = "nosic_optimality" if problem == "no_sic" else "sicbs_optimality"
    settings.pop("problem", None)
    settings.pop("experiment", None)

    try:
        params = SystemParams(**{k: float(settings.pop(k)) for k in PARAM_KEYS if k in settings})
        model = parse_model(str(settings.pop("model", "pathloss")))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    n_values = settings.pop("n", settings.pop("n_values", DEFAULT_N.get(experiment, [2, 4, 6, 8, 10, 12])))
    sweep = settings.pop("sweep", None)
    known = {
        "seed": "base_seed",
        "base_seed": "base_seed",
        "trials": "trials",
        "jobs": "jobs",
        "output": "output_path",
        "format": "format",
        "dump_assignments": "dump_assignments",
        "max_exhaustive_users": "max_exhaustive_users",
    }
    kwargs = {}
    for key, value in settings.items():
        if key not in known:
            raise ConfigError(f"unknown setting {key!r}")
        kwargs[known[key]] = value
    kwargs.setdefault("trials", DEFAULT_TRIALS.get(experiment, 1000))
    return ExperimentConfig(
        experiment=experiment,
        n_values=tuple(int(n) for n in n_values),
        model=model,
        params=params,
        sweep=None if sweep is None else tuple(float(s) for s in sweep),
        **kwargs,
    ).validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"offloadsim: config error: {exc}", file=sys.stderr)
        return 2
    result = run_experiment(config)
    text = write_output(result, config.output_path, config.format)
    if text is not None:
        sys.stdout.write(text)
    if config.experiment == "invariants":
        failures = result.invariant_failures
        print(f"invariants: {failures} failure(s)", file=sys.stderr)
        return 1 if failures else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
