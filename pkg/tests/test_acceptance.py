"""Acceptance gate. Each test records one PASS/FAIL line through the ``report``
fixture; the lines are printed in the terminal summary."""

import math
import time

import numpy as np
import pytest

from offloadsim import (
    Assignment,
    GeneratorConfig,
    PathLoss,
    Rayleigh,
    SicMode,
    SystemParams,
    best_subset_no_sic,
    derive_trial_seed,
    distributed_assign,
    generate,
    optimal_threshold,
    prefix_best,
    round_to_assignment,
    solve_exhaustive,
    solve_relaxation,
    solve_sic_both,
    solve_sic_one_side,
)
from offloadsim.cli import main
from offloadsim.experiments import (
    DEFAULT_POWER_SWEEP,
    ExperimentConfig,
    lookup,
    run_experiment,
    scenario_seed,
)
from offloadsim.no_sic import DOMINANCE_SNR
from offloadsim.sic_both import FRACTIONAL_TOL

TRIALS = 1000
EVEN_N = (2, 4, 6, 8, 10, 12)
ALL_N = tuple(range(2, 13))
SEED = 20140101


def frac_se(f, n):
    return math.sqrt(f * (1.0 - f) / n)


def scenarios(count, max_n, seed, params=SystemParams(), min_n=1):
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(min_n, max_n + 1))
        model = PathLoss() if i % 2 == 0 else Rayleigh(1.0)
        yield generate(GeneratorConfig(n, model, params, derive_trial_seed(seed, i)))


@pytest.fixture(scope="module")
def benefit_run():
    start = time.perf_counter()
    records = run_experiment(ExperimentConfig("sic_benefit", n_values=EVEN_N[:-1], trials=TRIALS)).records
    t0 = time.perf_counter()
    records += run_experiment(ExperimentConfig("sic_benefit", n_values=(12,), trials=TRIALS)).records
    return records, time.perf_counter() - t0, time.perf_counter() - start


@pytest.fixture(scope="module")
def gap_run():
    return run_experiment(ExperimentConfig("gap_vs_n", n_values=EVEN_N, trials=TRIALS)).records


def test_c01_sic_ordering(benefit_run, report):
    records, t12, _ = benefit_run
    counts = {n: lookup(records, n, "sic_benefit", "count_ordering") for n in EVEN_N}
    ok = all(c == TRIALS for c in counts.values()) and t12 < 600
    report("1", ok, f"ordering holds in {counts} of {TRIALS} trials per N; N=12 took {t12:.1f}s (<600s)")
    assert ok


def _gap_stats(records):
    mean = {n: lookup(records, n, "sic_both", "mean_normalized_gap") for n in EVEN_N}
    se = {n: lookup(records, n, "sic_both", "se_normalized_gap") for n in EVEN_N}
    return mean, se


def test_c02a_gap_at_two_users(gap_run, report):
    mean, se = _gap_stats(gap_run)
    ok = abs(mean[2] - 0.0085) <= 0.005
    report("2a", ok, f"mean gap at N=2 is {100 * mean[2]:.4f}% (target 0.85% +/- 0.5pp)")
    assert ok


def test_c02b_gap_at_twelve_users(gap_run, report):
    mean, _ = _gap_stats(gap_run)
    ok = mean[12] < 0.001
    report("2b", ok, f"mean gap at N=12 is {100 * mean[12]:.2e}% (< 0.1%)")
    assert ok


def test_c02c_gap_non_increasing(gap_run, report):
    mean, se = _gap_stats(gap_run)
    bad = [
        (a, b)
        for a, b in zip(EVEN_N, EVEN_N[1:])
        if mean[b] > mean[a] + 2 * math.hypot(se[a], se[b])
    ]
    ok = not bad
    seq = ", ".join(f"{n}:{100 * mean[n]:.2e}%" for n in EVEN_N)
    report("2c", ok, f"gap sequence {seq}; violations {bad}")
    assert ok


def test_c03_one_fractional(report):
    count = 10_000
    worst = 0
    for sc in scenarios(count, 50, seed=3):
        x = np.asarray(solve_relaxation(sc).x)
        worst = max(worst, int(np.sum((x > FRACTIONAL_TOL) & (x < 1 - FRACTIONAL_TOL))))
    ok = worst <= 1
    report("3", ok, f"max fractional coordinates over {count} relaxations (N<=50): {worst}")
    assert ok


def test_c04_sandwich(report):
    worst = -np.inf
    for sc in scenarios(500, 12, seed=4):
        res = solve_sic_both(sc)
        f_o = solve_exhaustive(sc, SicMode.WW).utility
        worst = max(worst, res.utility - f_o, f_o - res.metadata["relaxed_objective"])
    ok = worst <= 1e-9
    report("4", ok, f"largest sandwich violation over 500 scenarios (N<=12): {worst:.3e}")
    assert ok


def test_c05_threshold_rule(report):
    mismatches = 0
    for n in ALL_N:
        for trial in range(TRIALS):
            sc = generate(GeneratorConfig(n, PathLoss(), SystemParams(), scenario_seed(SEED, n, trial)))
            relaxed = solve_relaxation(sc)
            x = np.asarray(relaxed.x)
            fixed = (x <= FRACTIONAL_TOL) | (x >= 1 - FRACTIONAL_TOL)
            dist = distributed_assign(sc, optimal_threshold(relaxed, sc))
            mismatches += not np.array_equal(dist.x[fixed], round_to_assignment(relaxed).x[fixed])
    ok = mismatches == 0
    report("5", ok, f"T* rule disagrees with rounding in {mismatches} of {TRIALS * len(ALL_N)} trials")
    assert ok


def test_c06_prefix_search(report):
    rng = np.random.default_rng(6)
    mismatches = dominance_fail = dominant = 0
    for n in ALL_N:
        for _ in range(TRIALS):
            # gains spread over four decades so both regimes of the prefix rule occur
            snr = rng.exponential(1.0, n) * 10 ** rng.uniform(-2, 2)
            res = prefix_best(snr)
            idx, best = best_subset_no_sic(snr)
            same = abs(res.objective - best) <= 1e-12 * max(1.0, best)
            same = same and set(res.active.tolist()) == set(np.asarray(idx).tolist())
            mismatches += not same
            if snr.max() >= DOMINANCE_SNR:
                dominant += 1
                dominance_fail += res.k_star != 1
    ok = mismatches == 0 and dominance_fail == 0
    report(
        "6",
        ok,
        f"prefix vs subset search mismatches {mismatches}/{TRIALS * len(ALL_N)}; "
        f"k*!=1 in {dominance_fail} of {dominant} dominant cases",
    )
    assert ok


@pytest.fixture(scope="module")
def nosic_run():
    cfg = ExperimentConfig("nosic_optimality", n_values=EVEN_N, trials=TRIALS, sweep=DEFAULT_POWER_SWEEP)
    return run_experiment(cfg).records


def _match(records, scheme, n):
    return lookup(records, n, scheme, "mean_match")


def test_c07_no_sic_optimality(nosic_run, report):
    p1 = {n: _match(nosic_run, "no_sic@P=1", n) for n in EVEN_N}
    top = p1[12] >= 0.99
    trend = [
        (a, b)
        for a, b in zip(EVEN_N, EVEN_N[1:])
        if p1[b] < p1[a] - 2 * math.hypot(frac_se(p1[a], TRIALS), frac_se(p1[b], TRIALS))
    ]
    by_p = [_match(nosic_run, f"no_sic@P={p:g}", 2) for p in DEFAULT_POWER_SWEEP]
    power_steps = [
        (DEFAULT_POWER_SWEEP[i], DEFAULT_POWER_SWEEP[i + 1])
        for i in range(len(by_p) - 1)
        if by_p[i + 1] < by_p[i] - 2 * math.hypot(frac_se(by_p[i], TRIALS), frac_se(by_p[i + 1], TRIALS))
    ]
    gain = by_p[-1] > by_p[0] or by_p[0] == 1.0
    ok = top and not trend and not power_steps and gain
    report(
        "7",
        ok,
        f"P=1 match by N {p1}; N=2 match by P {dict(zip(DEFAULT_POWER_SWEEP, by_p))}; "
        f"N-trend violations {trend}, P-trend violations {power_steps}",
    )
    assert ok


def test_c08_sic_bs_optimality(report):
    cfg = ExperimentConfig("sicbs_optimality", n_values=(12,), trials=TRIALS, sweep=DEFAULT_POWER_SWEEP)
    records = run_experiment(cfg).records
    fr = {p: _match(records, f"sic_bs@P={p:g}", 12) for p in DEFAULT_POWER_SWEEP}
    hi, lo = max(fr, key=fr.get), min(fr, key=fr.get)
    spread = fr[hi] - fr[lo]
    tol = 3 * math.hypot(frac_se(fr[hi], TRIALS), frac_se(fr[lo], TRIALS))
    ok = fr[1.0] >= 0.99 and spread <= tol
    report("8", ok, f"N=12 match by P {fr}; spread {spread:.4f} vs 3SE {tol:.4f}")
    assert ok


def test_c09_fading(report):
    cfg = ExperimentConfig("fading_comparison", n_values=(6, 8, 10, 12), trials=TRIALS)
    records = run_experiment(cfg).records
    gaps = {}
    for label in ("rayleigh(mean=1)", "nakagami(m=2,mean=1)"):
        for n in cfg.n_values:
            scheme = lookup(records, n, f"sic_bs[{label}]", "mean_utility")
            opt = lookup(records, n, f"exhaustive_wo[{label}]", "mean_utility")
            gaps[(label, n)] = (opt - scheme) / opt
    worst = max(gaps.values())
    ok = worst <= 0.005 and min(gaps.values()) >= -1e-12
    report("9", ok, f"largest relative mean gap {100 * worst:.4f}% (<= 0.5%) over Rayleigh and Nakagami N=6..12")
    assert ok


def test_c10_event_c_frequency(report):
    draws = 10_000
    detail = []
    ok = True
    for n in (2, 5, 10):
        hits = 0
        for k in range(draws):
            sc = generate(GeneratorConfig(n, Rayleigh(1.0), SystemParams(), scenario_seed(SEED + 10, n, k)))
            hits += int(np.argmax(sc.gains_bs) == np.argmax(sc.gains_ap))
        f = hits / draws
        se = frac_se(1.0 / n, draws)
        ok &= abs(f - 1.0 / n) <= 3 * se
        detail.append(f"N={n}: {f:.4f} vs {1 / n:.4f} (3SE {3 * se:.4f})")
    report("10", ok, "; ".join(detail))
    assert ok


def test_c11_expensive_ap(report):
    failures = []
    rng = np.random.default_rng(11)
    for i in range(100):
        lam = float(rng.uniform(0.5, 2.0))
        mu = lam if i % 4 == 0 else lam * float(rng.uniform(1.0, 3.0))
        params = SystemParams(lam=lam, mu=mu)
        n = int(rng.integers(1, 11))
        model = PathLoss() if i % 2 == 0 else Rayleigh(1.0)
        sc = generate(GeneratorConfig(n, model, params, derive_trial_seed(11, i)))
        relaxed = solve_relaxation(sc)
        results = {
            "exhaustive_ww": solve_exhaustive(sc, SicMode.WW).assignment,
            "exhaustive_wo": solve_exhaustive(sc, SicMode.WO).assignment,
            "sic_both": solve_sic_both(sc).assignment,
            "relaxation_rounded": round_to_assignment(relaxed),
            "distributed_tstar": distributed_assign(sc, optimal_threshold(relaxed, sc)),
            "sic_one_side_bs": solve_sic_one_side(sc, "BS").assignment,
        }
        failures += [(i, name) for name, a in results.items() if a != Assignment.all_bs(n)]
    ok = not failures
    report("11", ok, f"non all-BS answers with mu >= lam over 100 scenarios x 6 solvers: {failures}")
    assert ok


def test_c12_determinism(tmp_path, report):
    runs = [
        ["gap-vs-n", "--n", "2,4,16", "--trials", "40"],
        ["optimality-count", "--problem", "no_sic", "--n", "2,6", "--trials", "30"],
        ["fading", "--n", "4", "--trials", "30", "--dump-assignments"],
        ["invariants", "--n", "8", "--trials", "30", "--format", "json"],
    ]
    differing = []
    for k, argv in enumerate(runs):
        outputs = []
        for jobs in (1, 1, 2, 3):
            path = tmp_path / f"run{k}_{len(outputs)}.out"
            assert main(argv + ["--seed", "99", "--jobs", str(jobs), "--output", str(path)]) == 0
            files = sorted(tmp_path.glob(path.name + "*"))
            outputs.append([f.read_bytes() for f in files])
        if any(o != outputs[0] for o in outputs[1:]):
            differing.append(argv[0])
    ok = not differing
    report("12", ok, f"{len(runs)} experiments x jobs in (1, 1, 2, 3); differing outputs: {differing}")
    assert ok
