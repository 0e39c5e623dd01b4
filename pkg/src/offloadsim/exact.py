"""Brute-force oracle over every feasible assignment.

Each user is placed on the BS, on the AP or switched off, so there are
exactly ``3**N`` candidates. Rates are computed once per subset of users
(``2**N`` of them for each receiver) and every candidate's utility is then
assembled from the two subset rates it uses.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .model import Assignment, ScenarioRealization, SicMode, UtilityBreakdown, utility

DEFAULT_MAX_USERS = 14
TIE_RTOL = 1e-12


class OracleSizeError(ValueError):
    """Raised when an exhaustive search would exceed the configured user limit."""


@dataclass(frozen=True)
class SolverResult:
    assignment: Assignment
    breakdown: UtilityBreakdown
    solver_name: str
    evaluations: int
    wall_time: float
    metadata: dict = field(default_factory=dict)

    @property
    def utility(self) -> float:
        return self.breakdown.utility


@lru_cache(maxsize=None)
def _subset_masks(n: int) -> np.ndarray:
    """Boolean matrix whose row ``s`` holds the bits of ``s`` (user i is bit i)."""
    s = np.arange(1 << n, dtype=np.int64)
    masks = ((s[:, None] >> np.arange(n)) & 1).astype(bool)
    masks.setflags(write=False)
    return masks


@lru_cache(maxsize=4)
def _ternary_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    """For every base-3 counter value, the BS subset index and AP subset index.

    Digit ``i`` of the counter is user ``i``'s state: 0 off, 1 BS, 2 AP.
    """
    total = 3**n
    counter = np.arange(total, dtype=np.int64)
    bs_idx = np.zeros(total, dtype=np.int64)
    ap_idx = np.zeros(total, dtype=np.int64)
    rest = counter
    for i in range(n):
        digit = rest % 3
        bs_idx |= (digit == 1).astype(np.int64) << i
        ap_idx |= (digit == 2).astype(np.int64) << i
        rest = rest // 3
    bs_idx = bs_idx.astype(np.int32)
    ap_idx = ap_idx.astype(np.int32)
    bs_idx.setflags(write=False)
    ap_idx.setflags(write=False)
    return bs_idx, ap_idx


def subset_rates(snr: np.ndarray, sic: bool) -> np.ndarray:
    """Sum rate of every subset of users, indexed by the subset's bitmask."""
    snr = np.asarray(snr, dtype=float)
    masks = _subset_masks(snr.size)
    totals = masks @ snr
    if sic:
        return np.log1p(totals)
    # interference seen by user j in subset s: totals[s] - snr[j] (only used where j is active)
    denom = 1.0 + totals[:, None] - snr[None, :]
    per_user = np.where(masks, np.log1p(snr[None, :] / np.where(masks, denom, 1.0)), 0.0)
    return per_user.sum(axis=1)


def _bits(index: np.ndarray, n: int) -> np.ndarray:
    return ((np.asarray(index)[..., None] >> np.arange(n)) & 1).astype(np.int8)


def solve_exhaustive(
    scenario: ScenarioRealization, mode: SicMode, max_users: int = DEFAULT_MAX_USERS
) -> SolverResult:
    """Global optimum of the offloading problem for ``mode`` by full enumeration.

    Ties (within a relative 1e-12) go to the lexicographically smallest
    ``(x, y)``, comparing ``x`` first and users in index order.
    """
    n = scenario.n_users
    if n > max_users:
        raise OracleSizeError(
            f"exhaustive search over 3**{n} assignments refused (limit N <= {max_users})"
        )
    start = time.perf_counter()
    p = scenario.params
    rate_b = subset_rates(scenario.snr_bs, mode.bs_sic)
    rate_a = subset_rates(scenario.snr_ap, mode.ap_sic)
    bs_idx, ap_idx = _ternary_index(n)
    values = p.lam * rate_b[bs_idx] + p.ap_weight * rate_a[ap_idx]
    best = values.max()
    tied = np.flatnonzero(values >= best - TIE_RTOL * max(1.0, abs(best)))
    xs = _bits(bs_idx[tied], n)
    ys = _bits(ap_idx[tied], n)
    # np.lexsort treats the last key as primary
    keys = np.concatenate([xs, ys], axis=1)[:, ::-1].T
    pick = np.lexsort(keys)[0]
    assignment = Assignment(xs[pick], ys[pick])
    elapsed = time.perf_counter() - start
    return SolverResult(
        assignment=assignment,
        breakdown=utility(scenario, assignment, mode),
        solver_name=f"exhaustive_{mode.value}",
        evaluations=int(values.size),
        wall_time=elapsed,
        metadata={"ties": int(tied.size)},
    )


def best_subset_no_sic(snr) -> tuple[np.ndarray, float]:
    """Best nonempty activation set for a single no-SIC receiver.

    Returns the sorted user indices and the sum rate. Ties go to the
    smallest set, then to the smallest bitmask.
    """
    snr = np.asarray(snr, dtype=float)
    rates = subset_rates(snr, sic=False)
    rates[0] = -np.inf
    best = rates.max()
    tied = np.flatnonzero(rates >= best - TIE_RTOL * max(1.0, abs(best)))
    sizes = _subset_masks(snr.size)[tied].sum(axis=1)
    pick = tied[np.lexsort((tied, sizes))[0]]
    return np.flatnonzero(_subset_masks(snr.size)[pick]), float(rates[pick])
