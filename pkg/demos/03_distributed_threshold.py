"""
Distributed decisions from a single broadcast threshold
=======================================================

Once the BS broadcasts the threshold ``T*`` computed from the relaxed
optimum, every user can decide alone: join the BS iff its own
``S_B / S_A`` is at least ``T*``. A badly chosen threshold costs utility.
"""

import numpy as np

from offloadsim import (
    GeneratorConfig,
    SicMode,
    distributed_assign,
    generate,
    optimal_threshold,
    solve_relaxation,
    solve_sic_both,
    utility,
)

scenario = generate(GeneratorConfig(n_users=16, seed=3))
relaxed = solve_relaxation(scenario)
t_star = optimal_threshold(relaxed, scenario)
central = solve_sic_both(scenario)
print("T* = %.4f, centralized utility %.4f" % (t_star, central.utility))

for t in (0.0625, 0.25, 1.0, t_star, 4.0, 16.0):
    a = distributed_assign(scenario, t)
    u = utility(scenario, a, SicMode.WW).utility
    print("T = %-8.4g BS users %2d  utility %.4f" % (t, a.x.sum(), u))

# users off the fractional boundary decide exactly as the centralized solver
x = np.asarray(relaxed.x)
fixed = (x < 1e-6) | (x > 1 - 1e-6)
assert np.array_equal(distributed_assign(scenario, t_star).x[fixed], central.assignment.x[fixed])
