"""Offloading with a SIC decoder at only one receiver.

With many users the optimum sends everyone to the SIC receiver except at
most one defector, so ``N + 1`` candidates cover it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .exact import SolverResult
from .model import Assignment, ScenarioRealization, SicMode, utility

# Largest radius around the AP for which one occupant settles the BS-SIC case (unit square).
MAX_DOMINANCE_RADIUS = 0.67


@dataclass(frozen=True)
class GeometricDiagnostic:
    z_star: float
    d_radius: float
    occupied: bool


def solve_sic_one_side(scenario: ScenarioRealization, sic_side: str = "BS") -> SolverResult:
    """Best of "everyone on the SIC side" and its ``N`` single-user defections.

    ``sic_side="BS"`` evaluates in mode WO, ``"AP"`` in mode OW. The all-in
    candidate is listed first and wins ties.
    """
    side = sic_side.upper()
    if side not in ("BS", "AP"):
        raise ValueError(f"sic_side must be 'BS' or 'AP', got {sic_side!r}")
    start = time.perf_counter()
    n = scenario.n_users
    if side == "BS":
        mode, base = SicMode.WO, Assignment.all_bs(n)
    else:
        mode, base = SicMode.OW, Assignment.all_ap(n)

    candidates = [base]
    for k in range(n):
        x = base.x.copy()
        y = base.y.copy()
        x[k], y[k] = y[k], x[k]
        candidates.append(Assignment(x, y))
    values = [utility(scenario, c, mode).utility for c in candidates]
    best = int(np.argmax(values))
    return SolverResult(
        assignment=candidates[best],
        breakdown=utility(scenario, candidates[best], mode),
        solver_name=f"sic_one_side_{side.lower()}",
        evaluations=len(candidates),
        wall_time=time.perf_counter() - start,
        metadata={"defector": best - 1 if best else None},
    )


def lemma52_diagnostic(
    scenario: ScenarioRealization,
    alpha: float = 1.0,
    gamma: float = 2.0,
    ap_position=(1.0, 1.0),
) -> GeometricDiagnostic:
    """Check whether some user is close enough to the AP to dominate it.

    ``z_star`` is the distance at which the path-loss gain ``alpha * z**-gamma``
    falls to ``(e - 1) * noise_ap / power``.
    """
    if scenario.positions is None:
        raise ValueError("scenario has no user positions")
    p = scenario.params
    z_star = (alpha * p.power / ((math.e - 1.0) * p.noise_ap)) ** (1.0 / gamma)
    radius = min(z_star, MAX_DOMINANCE_RADIUS)
    dist = np.hypot(*(scenario.positions - np.asarray(ap_position, dtype=float)).T)
    return GeometricDiagnostic(z_star=z_star, d_radius=radius, occupied=bool(np.any(dist <= radius)))
