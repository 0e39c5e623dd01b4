"""Offloading with SIC at both the BS and the AP.

The integer problem is solved through its box relaxation, whose optimum
has a threshold structure: users sorted by ``S_B / S_A`` descending go to
the BS up to one boundary user, which may hold a fractional indicator.
``solve_relaxation`` searches that structure in closed form; the projected
gradient solver is an independent cross-check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exact import SolverResult
from .model import Assignment, ScenarioRealization, SicMode, utility

FRACTIONAL_TOL = 1e-6
KKT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class KktCertificate:
    alpha: np.ndarray
    beta: np.ndarray
    stationarity_residual: float

    def complementary_slackness(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(max(np.max(np.abs(self.alpha * (x - 1.0))), np.max(np.abs(self.beta * x))))


@dataclass(frozen=True, eq=False)
class RelaxedSolution:
    x: np.ndarray
    objective: float
    fractional_index: Optional[int]
    kkt: KktCertificate


def relaxed_objective(scenario: ScenarioRealization, x) -> float:
    x = np.asarray(x, dtype=float)
    p = scenario.params
    return float(
        p.lam * np.log1p(scenario.snr_bs @ x) + p.ap_weight * np.log1p(scenario.snr_ap @ (1.0 - x))
    )


def relaxed_gradient(scenario: ScenarioRealization, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    p = scenario.params
    load_b = 1.0 + scenario.snr_bs @ x
    load_a = 1.0 + scenario.snr_ap @ (1.0 - x)
    return p.lam * scenario.snr_bs / load_b - p.ap_weight * scenario.snr_ap / load_a


def kkt_certificate(scenario: ScenarioRealization, x, tol: float = FRACTIONAL_TOL) -> KktCertificate:
    """Dual multipliers for the box constraints read off the gradient at ``x``."""
    x = np.asarray(x, dtype=float)
    grad = relaxed_gradient(scenario, x)
    at_one = x >= 1.0 - tol
    at_zero = x <= tol
    alpha = np.where(at_one, np.maximum(grad, 0.0), 0.0)
    beta = np.where(at_zero & ~at_one, np.maximum(-grad, 0.0), 0.0)
    residual = float(np.max(np.abs(grad - alpha + beta)))
    return KktCertificate(alpha, beta, residual)


def _fractional_index(x, tol: float = FRACTIONAL_TOL) -> Optional[int]:
    idx = np.flatnonzero((x > tol) & (x < 1.0 - tol))
    return int(idx[0]) if idx.size else None


def _package(scenario: ScenarioRealization, x: np.ndarray) -> RelaxedSolution:
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return RelaxedSolution(
        x=x,
        objective=relaxed_objective(scenario, x),
        fractional_index=_fractional_index(x),
        kkt=kkt_certificate(scenario, x),
    )


def ratio_order(scenario: ScenarioRealization) -> np.ndarray:
    """User indices sorted by ``S_B / S_A`` descending; equal ratios keep index order."""
    ratio = scenario.snr_bs / scenario.snr_ap
    return np.argsort(-ratio, kind="stable")


def solve_relaxation(scenario: ScenarioRealization) -> RelaxedSolution:
    """Global maximizer of the concave box relaxation by threshold search.

    For each position ``b`` in ratio order the users before ``b`` sit on the
    BS, the users after it on the AP, and the boundary user's indicator solves
    the one-dimensional stationarity equation, clipped to ``[0, 1]``. The first
    candidate passing the KKT sign check is returned.
    """
    n = scenario.n_users
    p = scenario.params
    if p.lam <= p.mu:
        return _package(scenario, np.ones(n))

    order = ratio_order(scenario)
    sb = scenario.snr_bs[order]
    sa = scenario.snr_ap[order]
    lam, w = p.lam, p.ap_weight
    # BS load from users strictly before b, AP load from users strictly after b
    load_b = 1.0 + np.concatenate(([0.0], np.cumsum(sb)[:-1]))
    load_a = 1.0 + np.concatenate((np.cumsum(sa[::-1])[::-1][1:], [0.0]))
    # lam*sb*(load_a + sa*(1-t)) = w*sa*(load_b + sb*t), linear in t
    t = (lam * sb * (load_a + sa) - w * sa * load_b) / (sa * sb * (lam + w))
    t = np.clip(t, 0.0, 1.0)

    candidates = []
    for b in range(n):
        xs = np.zeros(n)
        xs[:b] = 1.0
        xs[b] = t[b]
        x = np.empty(n)
        x[order] = xs
        cert = kkt_certificate(scenario, x)
        if cert.stationarity_residual <= KKT_TOL:
            return _package(scenario, x)
        candidates.append((relaxed_objective(scenario, x), -b, x))
    # Rounding noise can defeat the sign check when the boundary user's ratio
    # sits on the threshold; the optimum is still one of the candidates.
    return _package(scenario, max(candidates, key=lambda c: (c[0], c[1]))[2])


def solve_relaxation_pga(
    scenario: ScenarioRealization,
    x0=None,
    tol: float = KKT_TOL,
    max_iter: int = 100_000,
) -> RelaxedSolution:
    """Projected gradient ascent on the box relaxation.

    Barzilai-Borwein trial steps with Armijo backtracking along the projection
    arc; stops when ``|x - clip(x + grad)|_inf <= tol``.
    """
    n = scenario.n_users
    x = np.full(n, 0.5) if x0 is None else np.clip(np.asarray(x0, dtype=float), 0.0, 1.0)
    f = relaxed_objective(scenario, x)
    g = relaxed_gradient(scenario, x)
    step = 1.0
    for _ in range(max_iter):
        if np.max(np.abs(x - np.clip(x + g, 0.0, 1.0))) <= tol:
            break
        while True:
            x_new = np.clip(x + step * g, 0.0, 1.0)
            f_new = relaxed_objective(scenario, x_new)
            if f_new >= f + 1e-4 * (g @ (x_new - x)) or step < 1e-20:
                break
            step *= 0.5
        g_new = relaxed_gradient(scenario, x_new)
        s, yk = x_new - x, g_new - g
        sy = s @ yk
        step = float(np.clip((s @ s) / -sy, 1e-12, 1e12)) if sy < 0 else 1.0
        x, f, g = x_new, f_new, g_new
    return _package(scenario, x)


def round_to_assignment(relaxed: RelaxedSolution) -> Assignment:
    """Nearest-integer rounding; exactly 0.5 goes to the BS. Everyone else uses the AP."""
    x = (np.asarray(relaxed.x) >= 0.5).astype(np.int8)
    return Assignment(x, 1 - x)


def optimal_threshold(relaxed: RelaxedSolution, scenario: ScenarioRealization) -> float:
    """Ratio cutoff that reproduces the relaxed optimum user by user.

    Non-positive when ``mu >= lam``; any such threshold sends everyone to the BS.
    """
    p = scenario.params
    x = np.asarray(relaxed.x, dtype=float)
    load_b = 1.0 + scenario.snr_bs @ x
    load_a = 1.0 + scenario.snr_ap @ (1.0 - x)
    return float(p.ap_weight / p.lam * load_b / load_a)


def distributed_assign(scenario: ScenarioRealization, threshold: float) -> Assignment:
    """Each user joins the BS iff its own ``S_B / S_A`` is at least ``threshold``."""
    if not np.isfinite(threshold):
        raise ValueError(f"threshold must be finite, got {threshold}")
    x = (scenario.snr_bs / scenario.snr_ap >= threshold).astype(np.int8)
    return Assignment(x, 1 - x)


def solve_sic_both(scenario: ScenarioRealization) -> SolverResult:
    """Relax, round, and evaluate under SIC at both receivers."""
    start = time.perf_counter()
    relaxed = solve_relaxation(scenario)
    assignment = round_to_assignment(relaxed)
    breakdown = utility(scenario, assignment, SicMode.WW)
    return SolverResult(
        assignment=assignment,
        breakdown=breakdown,
        solver_name="sic_both",
        evaluations=scenario.n_users,
        wall_time=time.perf_counter() - start,
        metadata={
            "relaxed_objective": relaxed.objective,
            "rounded_objective": breakdown.utility,
            "fractional_index": relaxed.fractional_index,
            "threshold": optimal_threshold(relaxed, scenario),
        },
    )
