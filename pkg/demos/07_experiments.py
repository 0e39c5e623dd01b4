"""
Running experiments from Python and from the shell
==================================================

Every experiment is available through ``run_experiment`` and through the
``offloadsim`` command. Output is a long-format table with columns
experiment, n, trial, scheme, metric, value. Rows with trial = -1 hold
per-N aggregates.
"""

from offloadsim.experiments import ExperimentConfig, format_records, lookup, run_experiment

config = ExperimentConfig("sic_benefit", n_values=(2, 4, 6), trials=50)
out = run_experiment(config)
for n in config.n_values:
    means = [lookup(out.records, n, f"exhaustive_{m}", "mean_utility") for m in ("ww", "wo", "oo")]
    print("N=%d  U_ww %.4f  U_wo %.4f  U_oo %.4f" % (n, *means))

text = format_records([r for r in out.records if r.trial == -1])
print(text[:400])

# The same experiment from the shell, with two workers (the output does not
# depend on the worker count):
#
#   offloadsim sic-benefit --n 2,4,6 --trials 50 --jobs 2 --output benefit.csv
#   offloadsim optimality-count --problem no_sic --n 12 --sweep 1,2,4,8
#   offloadsim invariants --trials 500; echo "exit status $?"
