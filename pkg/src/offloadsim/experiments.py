"""Monte Carlo experiments over seeded realizations, emitted as flat metric records.

Each ``(n, trial)`` pair is an independent task with its own seed, so the
output does not depend on how many worker processes run the tasks.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .exact import DEFAULT_MAX_USERS, best_subset_no_sic, solve_exhaustive
from .model import SicMode, SystemParams, sum_rate_no_sic, sum_rate_sic, utility
from .no_sic import DOMINANCE_SNR, prefix_best, solve_no_sic
from .scenario import (
    PRNG_NAME,
    GeneratorConfig,
    NakagamiM,
    PathLoss,
    Rayleigh,
    derive_trial_seed,
    generate,
    model_label,
)
from .sic_both import (
    FRACTIONAL_TOL,
    distributed_assign,
    optimal_threshold,
    ratio_order,
    round_to_assignment,
    solve_relaxation,
    solve_relaxation_pga,
    solve_sic_both,
)
from .sic_one_side import solve_sic_one_side

EXPERIMENTS = (
    "gap_vs_n",
    "threshold_sweep",
    "nosic_optimality",
    "sicbs_optimality",
    "fading_comparison",
    "sic_benefit",
    "invariants",
)
EXHAUSTIVE_ONLY = ("nosic_optimality", "sicbs_optimality", "fading_comparison", "sic_benefit")

DEFAULT_POWER_SWEEP = (1.0, 2.0, 4.0, 8.0)
DEFAULT_THRESHOLD_SWEEP = tuple(float(2.0**k) for k in np.arange(-4.0, 4.01, 0.5))
MATCH_TOL = 1e-9
EVENT_C_USERS = 5
EVENT_C_DRAWS_PER_TRIAL = 20

CSV_HEADER = ("experiment", "n", "trial", "scheme", "metric", "value")
# trial index used for per-n aggregate rows
AGGREGATE_TRIAL = -1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class MetricRecord:
    experiment: str
    n: int
    trial: int
    scheme: str
    metric: str
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite metric {self}")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_values: tuple = (2, 4, 6, 8, 10, 12)
    trials: int = 1000
    base_seed: int = 20140101
    model: object = field(default_factory=PathLoss)
    params: SystemParams = field(default_factory=SystemParams)
    sweep: Optional[tuple] = None
    output_path: Optional[str] = None
    format: str = "csv"
    jobs: int = 1
    dump_assignments: bool = False
    max_exhaustive_users: int = DEFAULT_MAX_USERS

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.n_values or min(self.n_values) < 1:
            raise ConfigError("n_values must be a nonempty list of positive user counts")
        if self.experiment in EXHAUSTIVE_ONLY + ("invariants",) and max(self.n_values) > self.max_exhaustive_users:
            raise ConfigError(
                f"{self.experiment} needs the exhaustive oracle; N <= {self.max_exhaustive_users}"
            )
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.sweep is not None and (not self.sweep or min(self.sweep) <= 0):
            raise ConfigError("sweep values must be positive")
        if self.experiment == "fading_comparison" and not isinstance(self.model, (PathLoss, Rayleigh, NakagamiM)):
            raise ConfigError("unsupported channel model")
        return self

    def resolved(self) -> dict:
        """Settings that determine the output (no jobs, no paths)."""
        sweep = self.sweep
        sweep_source = "user"
        if sweep is None and self.experiment in ("nosic_optimality", "sicbs_optimality"):
            sweep, sweep_source = DEFAULT_POWER_SWEEP, "implementer-chosen default"
        elif sweep is None and self.experiment == "threshold_sweep":
            sweep, sweep_source = DEFAULT_THRESHOLD_SWEEP, "implementer-chosen default"
        return {
            "experiment": self.experiment,
            "n_values": list(self.n_values),
            "trials": self.trials,
            "base_seed": self.base_seed,
            "model": model_label(self.model),
            "params": dataclasses.asdict(self.params),
            "sweep": None if sweep is None else list(sweep),
            "sweep_source": sweep_source if sweep is not None else None,
            "max_exhaustive_users": self.max_exhaustive_users,
            "prng": PRNG_NAME,
            "seed_derivation": "splitmix64(splitmix64(base_seed ^ n) ^ trial)",
            "version": __version__,
        }


@dataclass(frozen=True)
class AssignmentDump:
    experiment: str
    n: int
    trial: int
    scheme: str
    mode: str
    power: float
    assignment: str


def scenario_seed(base_seed: int, n: int, trial: int) -> int:
    return derive_trial_seed(derive_trial_seed(base_seed, n), trial)


def _scenario(config, n, trial, model=None, params=None):
    return generate(
        GeneratorConfig(
            n_users=n,
            model=config.model if model is None else model,
            params=config.params if params is None else params,
            seed=scenario_seed(config.base_seed, n, trial),
        )
    )


class _Trial:
    """Collects the records and assignment dumps of one task."""

    def __init__(self, config, n, trial):
        self.config, self.n, self.trial = config, n, trial
        self.records: list[MetricRecord] = []
        self.dumps: list[AssignmentDump] = []

    def emit(self, scheme, metric, value):
        self.records.append(
            MetricRecord(self.config.experiment, self.n, self.trial, scheme, metric, float(value))
        )

    def result(self, scheme, res, mode, scenario):
        """Emit a solver's utility and remember the assignment behind it."""
        self.emit(scheme, "utility", res.utility)
        if self.config.dump_assignments:
            self.dumps.append(
                AssignmentDump(
                    self.config.experiment, self.n, self.trial, scheme, mode.value,
                    scenario.params.power, res.assignment.to_string(),
                )
            )


def _gap_trial(t: _Trial):
    sc = _scenario(t.config, t.n, t.trial)
    fast = solve_sic_both(sc)
    f_s = fast.utility
    f_r = fast.metadata["relaxed_objective"]
    t.result("sic_both", fast, SicMode.WW, sc)
    t.emit("relaxation", "objective", f_r)
    if t.n <= t.config.max_exhaustive_users:
        opt = solve_exhaustive(sc, SicMode.WW, t.config.max_exhaustive_users)
        t.result("exhaustive", opt, SicMode.WW, sc)
        t.emit("sic_both", "normalized_gap", (opt.utility - f_s) / opt.utility)
    else:
        t.emit("sic_both_vs_relaxation", "normalized_gap", (f_r - f_s) / f_r)


def _threshold_trial(t: _Trial):
    sc = _scenario(t.config, t.n, t.trial)
    relaxed = solve_relaxation(sc)
    rounded = round_to_assignment(relaxed)
    centralized = solve_sic_both(sc)
    t.result("sic_both", centralized, SicMode.WW, sc)
    if t.n <= t.config.max_exhaustive_users:
        t.result("exhaustive", solve_exhaustive(sc, SicMode.WW, t.config.max_exhaustive_users), SicMode.WW, sc)
    t_star = optimal_threshold(relaxed, sc)
    at_star = distributed_assign(sc, t_star)
    t.emit("distributed_tstar", "threshold", t_star)
    t.emit("distributed_tstar", "utility", utility(sc, at_star, SicMode.WW).utility)
    fixed = _non_fractional(relaxed.x)
    t.emit("distributed_tstar", "matches_rounding", np.array_equal(at_star.x[fixed], rounded.x[fixed]))
    if t.config.dump_assignments:
        t.dumps.append(AssignmentDump(t.config.experiment, t.n, t.trial, "distributed_tstar", "ww",
                                      sc.params.power, at_star.to_string()))
    for thr in t.config.resolved()["sweep"]:
        a = distributed_assign(sc, thr)
        scheme = f"distributed_T={thr:.6g}"
        t.emit(scheme, "utility", utility(sc, a, SicMode.WW).utility)
        if t.config.dump_assignments:
            t.dumps.append(AssignmentDump(t.config.experiment, t.n, t.trial, scheme, "ww",
                                          sc.params.power, a.to_string()))


def _optimality_trial(t: _Trial):
    problem = "no_sic" if t.config.experiment == "nosic_optimality" else "sic_bs"
    base = _scenario(t.config, t.n, t.trial)
    t.emit(problem, "event_c", np.argmax(base.gains_bs) == np.argmax(base.gains_ap))
    for power in t.config.resolved()["sweep"]:
        sc = base.with_params(dataclasses.replace(t.config.params, power=power))
        if problem == "no_sic":
            fast, mode = solve_no_sic(sc), SicMode.OO
        else:
            fast, mode = solve_sic_one_side(sc, "BS"), SicMode.WO
        opt = solve_exhaustive(sc, mode, t.config.max_exhaustive_users)
        tag = f"P={power:.6g}"
        t.result(f"{problem}@{tag}", fast, mode, sc)
        t.result(f"exhaustive_{mode.value}@{tag}", opt, mode, sc)
        t.emit(f"{problem}@{tag}", "match", fast.utility >= opt.utility - MATCH_TOL)


def fading_models(config) -> list:
    if isinstance(config.model, PathLoss):
        return [Rayleigh(1.0), NakagamiM(2.0, 1.0)]
    return [config.model]


def _fading_trial(t: _Trial):
    for model in fading_models(t.config):
        sc = _scenario(t.config, t.n, t.trial, model=model)
        label = model_label(model)
        fast = solve_sic_one_side(sc, "BS")
        opt = solve_exhaustive(sc, SicMode.WO, t.config.max_exhaustive_users)
        t.result(f"sic_bs[{label}]", fast, SicMode.WO, sc)
        t.result(f"exhaustive_wo[{label}]", opt, SicMode.WO, sc)
        t.emit(f"sic_bs[{label}]", "match", fast.utility >= opt.utility - MATCH_TOL)


def _benefit_trial(t: _Trial):
    sc = _scenario(t.config, t.n, t.trial)
    u = {}
    for mode in (SicMode.WW, SicMode.WO, SicMode.OO):
        res = solve_exhaustive(sc, mode, t.config.max_exhaustive_users)
        t.result(f"exhaustive_{mode.value}", res, mode, sc)
        u[mode] = res.utility
    ordered = u[SicMode.WW] >= u[SicMode.WO] - MATCH_TOL and u[SicMode.WO] >= u[SicMode.OO] - MATCH_TOL
    t.emit("sic_benefit", "ordering", ordered)


def _non_fractional(x) -> np.ndarray:
    x = np.asarray(x)
    return (x <= FRACTIONAL_TOL) | (x >= 1.0 - FRACTIONAL_TOL)


def _invariant_trial(t: _Trial):
    """Random scenarios (up to ``max(n_values)`` users for oracle checks, up to 50
    otherwise); every check emits ``pass`` as 1 or 0."""
    cfg = t.config
    seed = scenario_seed(cfg.base_seed, 0, t.trial)
    rng = np.random.Generator(np.random.PCG64(seed))
    small_n = int(rng.integers(1, min(max(cfg.n_values), cfg.max_exhaustive_users) + 1))
    large_n = int(rng.integers(1, 51))
    model = PathLoss() if t.trial % 2 == 0 else Rayleigh(1.0)
    gen = lambda n, k: generate(GeneratorConfig(n, model, cfg.params, derive_trial_seed(seed, k)))

    sc = gen(small_n, 1)
    opt = {m: solve_exhaustive(sc, m, cfg.max_exhaustive_users) for m in SicMode}
    fast = solve_sic_both(sc)
    f_s, f_o, f_r = fast.utility, opt[SicMode.WW].utility, fast.metadata["relaxed_objective"]
    t.emit("sandwich", "pass", f_s <= f_o + MATCH_TOL and f_o <= f_r + MATCH_TOL)
    t.emit(
        "sic_ordering",
        "pass",
        opt[SicMode.WW].utility >= opt[SicMode.WO].utility - MATCH_TOL
        and opt[SicMode.WO].utility >= opt[SicMode.OO].utility - MATCH_TOL,
    )
    t.emit(
        "oracle_dominance",
        "pass",
        opt[SicMode.OO].utility >= solve_no_sic(sc).utility - MATCH_TOL
        and opt[SicMode.WO].utility >= solve_sic_one_side(sc, "BS").utility - MATCH_TOL
        and opt[SicMode.OW].utility >= solve_sic_one_side(sc, "AP").utility - MATCH_TOL,
    )
    if cfg.params.lam > cfg.params.mu:
        full = opt[SicMode.WW].assignment
        t.emit("ww_no_idle_users", "pass", bool(np.all(full.x + full.y == 1)))

    big = gen(large_n, 2)
    relaxed = solve_relaxation(big)
    x = np.asarray(relaxed.x)
    frac = ~_non_fractional(x)
    t.emit("one_fractional", "pass", frac.sum() <= 1)
    t.emit("kkt_residual", "pass", relaxed.kkt.stationarity_residual <= 1e-8)
    sorted_x = x[ratio_order(big)]
    at_one = sorted_x >= 1.0 - FRACTIONAL_TOL
    at_zero = sorted_x <= FRACTIONAL_TOL
    prefix_ok = not np.any(at_one[1:] & ~at_one[:-1]) and not np.any(at_zero[:-1] & ~at_zero[1:])
    t.emit("threshold_prefix", "pass", prefix_ok)
    t.emit("cross_solver", "pass", abs(solve_relaxation_pga(big).objective - relaxed.objective) <= 1e-6)
    keep = _non_fractional(x)
    dist = distributed_assign(big, optimal_threshold(relaxed, big))
    t.emit("tstar_distributed", "pass", np.array_equal(dist.x[keep], round_to_assignment(relaxed).x[keep]))

    snr = big.snr_ap[: min(large_n, 12)]
    pb = prefix_best(snr)
    _, best = best_subset_no_sic(snr)
    lemma_ok = abs(pb.objective - best) <= 1e-9 * max(1.0, best)
    if snr.max() >= DOMINANCE_SNR:
        lemma_ok = lemma_ok and pb.k_star == 1
    t.emit("prefix_lemma", "pass", lemma_ok)

    mask = rng.random(large_n) < 0.5
    t.emit("sic_rate_dominates", "pass",
           sum_rate_sic(big.snr_bs, mask) >= sum_rate_no_sic(big.snr_bs, mask) - 1e-12)

    hits = 0
    for k in range(EVENT_C_DRAWS_PER_TRIAL):
        g = generate(GeneratorConfig(EVENT_C_USERS, Rayleigh(1.0), cfg.params, derive_trial_seed(seed, 100 + k)))
        hits += int(np.argmax(g.gains_bs) == np.argmax(g.gains_ap))
    t.emit("event_c", "hits", hits)


_TRIAL_FUNCS = {
    "gap_vs_n": _gap_trial,
    "threshold_sweep": _threshold_trial,
    "nosic_optimality": _optimality_trial,
    "sicbs_optimality": _optimality_trial,
    "fading_comparison": _fading_trial,
    "sic_benefit": _benefit_trial,
    "invariants": _invariant_trial,
}

BOOLEAN_METRICS = ("match", "ordering", "pass", "event_c", "matches_rounding")


def _run_task(args):
    config, n, trial = args
    t = _Trial(config, n, trial)
    _TRIAL_FUNCS[config.experiment](t)
    return t.records, t.dumps


def _tasks(config):
    if config.experiment == "invariants":
        return [(config, 0, trial) for trial in range(config.trials)]
    return [(config, n, trial) for n in config.n_values for trial in range(config.trials)]


def aggregate(records: list[MetricRecord]) -> list[MetricRecord]:
    """Per ``(n, scheme, metric)``: mean and standard error, plus counts for 0/1 metrics."""
    groups: dict = {}
    for r in sorted(records, key=lambda r: (r.n, r.scheme, r.metric, r.trial)):
        groups.setdefault((r.experiment, r.n, r.scheme, r.metric), []).append(r.value)
    out = []
    for (exp, n, scheme, metric), values in groups.items():
        v = np.asarray(values)
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        out.append(MetricRecord(exp, n, AGGREGATE_TRIAL, scheme, f"mean_{metric}", float(v.mean())))
        out.append(MetricRecord(exp, n, AGGREGATE_TRIAL, scheme, f"se_{metric}", se))
        if metric in BOOLEAN_METRICS:
            out.append(MetricRecord(exp, n, AGGREGATE_TRIAL, scheme, f"count_{metric}", float(v.sum())))
            out.append(MetricRecord(exp, n, AGGREGATE_TRIAL, scheme, "trials", float(v.size)))
    return out


def _invariant_summary(records: list[MetricRecord]) -> list[MetricRecord]:
    out = []
    by_suite: dict = {}
    hits = []
    for r in records:
        if r.metric == "pass":
            by_suite.setdefault(r.scheme, []).append(r.value)
        elif r.scheme == "event_c":
            hits.append(r.value)
    for suite in sorted(by_suite):
        v = np.asarray(by_suite[suite])
        out.append(MetricRecord("invariants", 0, AGGREGATE_TRIAL, suite, "checked", float(v.size)))
        out.append(MetricRecord("invariants", 0, AGGREGATE_TRIAL, suite, "failures", float(np.sum(v == 0))))
    if hits:
        draws = len(hits) * EVENT_C_DRAWS_PER_TRIAL
        freq = sum(hits) / draws
        expected = 1.0 / EVENT_C_USERS
        se = math.sqrt(expected * (1 - expected) / draws)
        ok = abs(freq - expected) <= 3 * se
        for metric, value in (("frequency", freq), ("expected", expected), ("se", se),
                              ("checked", 1.0), ("failures", 0.0 if ok else 1.0)):
            out.append(MetricRecord("invariants", EVENT_C_USERS, AGGREGATE_TRIAL, "event_c", metric, value))
    return out


@dataclass
class ExperimentOutput:
    config: ExperimentConfig
    records: list
    dumps: list

    @property
    def invariant_failures(self) -> int:
        return int(sum(r.value for r in self.records if r.metric == "failures"))


def run_experiment(config: ExperimentConfig) -> ExperimentOutput:
    config.validate()
    tasks = _tasks(config)
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * config.jobs))))
    else:
        results = [_run_task(task) for task in tasks]
    records, dumps = [], []
    for recs, ds in results:
        records.extend(recs)
        dumps.extend(ds)
    if config.experiment == "invariants":
        records.extend(_invariant_summary(records))
    else:
        records.extend(aggregate(records))
    return ExperimentOutput(config, records, dumps)


def _with(config, experiment):
    if config.experiment != experiment:
        config = dataclasses.replace(config, experiment=experiment)
    return config


def run_gap_vs_n(config: ExperimentConfig) -> list[MetricRecord]:
    return run_experiment(_with(config, "gap_vs_n")).records


def run_threshold_sweep(config: ExperimentConfig) -> list[MetricRecord]:
    return run_experiment(_with(config, "threshold_sweep")).records


def run_optimality_count(config: ExperimentConfig, problem: str) -> list[MetricRecord]:
    names = {"no_sic": "nosic_optimality", "sic_bs": "sicbs_optimality"}
    if problem not in names:
        raise ConfigError(f"problem must be no_sic or sic_bs, got {problem!r}")
    return run_experiment(_with(config, names[problem])).records


def run_fading_comparison(config: ExperimentConfig) -> list[MetricRecord]:
    return run_experiment(_with(config, "fading_comparison")).records


def run_sic_benefit(config: ExperimentConfig) -> list[MetricRecord]:
    return run_experiment(_with(config, "sic_benefit")).records


def run_invariants(config: ExperimentConfig) -> list[MetricRecord]:
    return run_experiment(_with(config, "invariants")).records


def lookup(records, n, scheme, metric, trial=AGGREGATE_TRIAL) -> float:
    for r in records:
        if r.n == n and r.scheme == scheme and r.metric == metric and r.trial == trial:
            return r.value
    raise KeyError((n, scheme, metric, trial))


def format_records(records, fmt: str = "csv") -> str:
    out = io.StringIO(newline="")
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow((r.experiment, r.n, r.trial, r.scheme, r.metric, f"{r.value:.12g}"))
    elif fmt == "json":
        for r in records:
            row = dataclasses.asdict(r)
            row["value"] = float(f"{r.value:.12g}")
            out.write(json.dumps(row, sort_keys=False) + "\n")
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    return out.getvalue()


def format_dumps(dumps) -> str:
    out = io.StringIO(newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("experiment", "n", "trial", "scheme", "mode", "power", "assignment"))
    for d in dumps:
        w.writerow((d.experiment, d.n, d.trial, d.scheme, d.mode, f"{d.power:.12g}", d.assignment))
    return out.getvalue()


def write_output(result: ExperimentOutput, path=None, fmt: str = "csv") -> Optional[str]:
    """Write records (and metadata, assignment dumps) to ``path``; return the text if ``path`` is None."""
    text = format_records(result.records, fmt)
    if path is None:
        return text
    path = Path(path)
    path.write_text(text, encoding="utf-8", newline="\n")
    meta = json.dumps(result.config.resolved(), indent=2, sort_keys=True) + "\n"
    Path(str(path) + ".meta.json").write_text(meta, encoding="utf-8", newline="\n")
    if result.config.dump_assignments:
        Path(str(path) + ".assignments.csv").write_text(format_dumps(result.dumps), encoding="utf-8", newline="\n")
    return None
