"""
No SIC anywhere: prefix search and one-one association
======================================================

Without SIC each receiver's best active set is a prefix of its users
sorted by SNR. A user with SNR of at least ``e - 1`` drowns out everyone
else, so in dense networks each receiver serves a single user.
"""

import numpy as np

from offloadsim import (
    GeneratorConfig,
    SicMode,
    best_subset_no_sic,
    generate,
    one_one_association,
    prefix_best,
    solve_exhaustive,
    solve_no_sic,
)

# prefix search against brute force over all subsets
snr = np.array([0.5, 0.4, 0.3])
res = prefix_best(snr)
print("weak users: k* =", res.k_star, "objective %.4f" % res.objective, "subset search %.4f" % best_subset_no_sic(snr)[1])

res = prefix_best([0.3, 2.5, 0.9])
print("one strong user: k* =", res.k_star, "active", res.active.tolist())

scenario = generate(GeneratorConfig(n_users=12, seed=11))
fast = solve_no_sic(scenario)
best = solve_exhaustive(scenario, SicMode.OO)
print("solver   ", fast.assignment.to_string(), "%.6f" % fast.utility, fast.metadata)
print("exhaustive", best.assignment.to_string(), "%.6f" % best.utility)
try:
    print("one-one   ", one_one_association(scenario).to_string())
except ValueError as exc:
    # event C: the same user is best for both receivers
    print("one-one association not defined:", exc)
