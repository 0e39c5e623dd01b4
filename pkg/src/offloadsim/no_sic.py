"""Offloading with no SIC decoder at either receiver.

Without the coupling constraint the problem splits into one activation
problem per receiver, each solved by a prefix search over users sorted by
SNR. Overlaps between the two activation sets are settled afterwards.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .exact import SolverResult
from .model import Assignment, ScenarioRealization, SicMode, utility

# An SNR at or above this makes its user the sole transmitter of a no-SIC receiver.
DOMINANCE_SNR = math.e - 1.0
MAX_CONFLICT_ENUMERATION = 8


@dataclass(frozen=True, eq=False)
class PrefixSearchResult:
    k_star: int
    active_set: np.ndarray
    objective: float

    @property
    def active(self) -> np.ndarray:
        return self.active_set[: self.k_star]


def prefix_rates(sorted_snr) -> np.ndarray:
    """No-SIC sum rate of each prefix ``1..N`` of an already sorted SNR vector."""
    s = np.asarray(sorted_snr, dtype=float)
    n = s.size
    totals = np.cumsum(s)
    # rate of user i inside prefix k: ln((1 + total_k) / (1 + total_k - s_i))
    denom = 1.0 + totals[:, None] - s[None, :]
    inside = np.tril(np.ones((n, n), dtype=bool))
    terms = np.where(inside, np.log1p(s[None, :] / np.where(inside, denom, 1.0)), 0.0)
    return terms.sum(axis=1)


def prefix_best(snr) -> PrefixSearchResult:
    snr = np.asarray(snr, dtype=float)
    if snr.ndim != 1 or snr.size == 0:
        raise ValueError("prefix_best needs a nonempty 1-D SNR vector")
    order = np.argsort(-snr, kind="stable")
    rates = prefix_rates(snr[order])
    k = int(np.argmax(rates)) + 1
    order = order.copy()
    order.setflags(write=False)
    return PrefixSearchResult(k_star=k, active_set=order, objective=float(rates[k - 1]))


def one_one_association(scenario: ScenarioRealization) -> Assignment:
    """Best-to-BS user on the BS, best-to-AP user on the AP, everyone else off."""
    n = scenario.n_users
    if n < 2:
        raise ValueError("one-one association needs at least two users")
    m = int(np.argmax(scenario.gains_bs))
    k = int(np.argmax(scenario.gains_ap))
    if m == k:
        raise ValueError(f"user {m} is the best user for both receivers; use solve_no_sic")
    x = np.zeros(n, dtype=np.int8)
    y = np.zeros(n, dtype=np.int8)
    x[m] = 1
    y[k] = 1
    return Assignment(x, y)


def _refill(snr, excluded) -> np.ndarray:
    """Best prefix activation among users not in ``excluded``, as an indicator vector."""
    out = np.zeros(snr.size, dtype=np.int8)
    avail = np.flatnonzero(~excluded.astype(bool))
    if avail.size:
        out[avail[prefix_best(snr[avail]).active]] = 1
    return out


def _resolve_conflicts(scenario, x, y, conflicted):
    """Place users claimed by both receivers; returns the assignment and the method used.

    Each placement of the conflicted users is tried as is and, for a receiver
    that lost one of its claimed users, with that receiver's activation set
    recomputed over the users the other receiver left free.
    """
    x = x.copy()
    y = y.copy()
    x[conflicted] = 0
    y[conflicted] = 0
    if len(conflicted) <= MAX_CONFLICT_ENUMERATION:
        best = None
        # state 0 off, 1 BS, 2 AP; product order keeps the first maximum deterministic
        for states in itertools.product((1, 2, 0), repeat=len(conflicted)):
            xs, ys = x.copy(), y.copy()
            for user, s in zip(conflicted, states):
                xs[user] = s == 1
                ys[user] = s == 2
            options = [(xs, ys)]
            if any(s != 2 for s in states):
                options.append((xs, _refill(scenario.snr_ap, xs)))
            if any(s != 1 for s in states):
                options.append((_refill(scenario.snr_bs, ys), ys))
            for ox, oy in options:
                cand = Assignment(ox, oy)
                u = utility(scenario, cand, SicMode.OO).utility
                if best is None or u > best[0]:
                    best = (u, cand)
        return best[1], "enumerate"
    for user in conflicted:
        options = []
        for s in (1, 2, 0):
            xs, ys = x.copy(), y.copy()
            xs[user] = s == 1
            ys[user] = s == 2
            options.append((utility(scenario, Assignment(xs, ys), SicMode.OO).utility, xs, ys))
        _, x, y = max(options, key=lambda o: o[0])
    return Assignment(x, y), "greedy"


def solve_no_sic(scenario: ScenarioRealization) -> SolverResult:
    """Solve each receiver's activation problem and merge.

    When ``mu >= lam`` the AP carries no net revenue and stays empty.
    """
    start = time.perf_counter()
    n = scenario.n_users
    p = scenario.params
    bs = prefix_best(scenario.snr_bs)
    x = np.zeros(n, dtype=np.int8)
    x[bs.active] = 1
    y = np.zeros(n, dtype=np.int8)
    meta = {"k_bs": bs.k_star, "k_ap": 0, "conflicts": 0, "resolution": "none"}
    if p.ap_weight > 0:
        ap = prefix_best(scenario.snr_ap)
        y[ap.active] = 1
        meta["k_ap"] = ap.k_star
    conflicted = [int(i) for i in np.flatnonzero(x & y)]
    if conflicted:
        assignment, method = _resolve_conflicts(scenario, x, y, conflicted)
        meta.update(conflicts=len(conflicted), resolution=method)
    else:
        assignment = Assignment(x, y)
    return SolverResult(
        assignment=assignment,
        breakdown=utility(scenario, assignment, SicMode.OO),
        solver_name="no_sic",
        evaluations=2 * n,
        wall_time=time.perf_counter() - start,
        metadata=meta,
    )
