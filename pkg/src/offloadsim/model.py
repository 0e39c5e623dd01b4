"""Domain types and utility functions for uplink WiFi offloading.

All rates are in nats. Utilities are evaluated from cached SNRs, never
from raw gains.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemParams:
    """Prices and radio constants shared by every user.

    ``lam`` is the operator's revenue per nat, ``mu`` the price per nat paid
    to the AP owner.
    """

    lam: float = 1.0
    mu: float = 0.5
    power: float = 1.0
    noise_bs: float = 1.0
    noise_ap: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if not self.mu >= 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if not self.power > 0:
            raise ValueError(f"power must be > 0, got {self.power}")
        if not (self.noise_bs > 0 and self.noise_ap > 0):
            raise ValueError("noise powers must be > 0")

    @property
    def ap_weight(self) -> float:
        """Net revenue per nat carried by the AP, ``lam - mu``."""
        return self.lam - self.mu


@dataclass(frozen=True, eq=False)
class ScenarioRealization:
    """One draw of per-user channel gains plus the system constants."""

    params: SystemParams
    gains_bs: np.ndarray
    gains_ap: np.ndarray
    positions: Optional[np.ndarray] = None
    snr_bs: np.ndarray = field(init=False, repr=False)
    snr_ap: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g_b = _frozen(self.gains_bs)
        g_a = _frozen(self.gains_ap)
        if g_b.ndim != 1 or g_a.ndim != 1:
            raise ValueError("gains must be one-dimensional")
        if g_b.size < 1 or g_b.size != g_a.size:
            raise ValueError(
                f"gains_bs and gains_ap must have equal nonzero length, got {g_b.size} and {g_a.size}"
            )
        if not (np.all(np.isfinite(g_b)) and np.all(np.isfinite(g_a))):
            raise ValueError("gains must be finite")
        if np.any(g_b <= 0) or np.any(g_a <= 0):
            raise ValueError("gains must be strictly positive")
        object.__setattr__(self, "gains_bs", g_b)
        object.__setattr__(self, "gains_ap", g_a)
        if self.positions is not None:
            pos = _frozen(self.positions)
            if pos.shape != (g_b.size, 2):
                raise ValueError(f"positions must have shape ({g_b.size}, 2), got {pos.shape}")
            object.__setattr__(self, "positions", pos)
        p = self.params
        object.__setattr__(self, "snr_bs", _frozen(g_b * (p.power / p.noise_bs)))
        object.__setattr__(self, "snr_ap", _frozen(g_a * (p.power / p.noise_ap)))

    @property
    def n_users(self) -> int:
        return int(self.gains_bs.size)

    def with_params(self, params: SystemParams) -> "ScenarioRealization":
        """Same gains and positions under different system constants."""
        return ScenarioRealization(params, self.gains_bs, self.gains_ap, self.positions)

    def permuted(self, order: Sequence[int]) -> "ScenarioRealization":
        order = np.asarray(order, dtype=int)
        pos = None if self.positions is None else self.positions[order]
        return ScenarioRealization(self.params, self.gains_bs[order], self.gains_ap[order], pos)


@dataclass(frozen=True, eq=False)
class Assignment:
    """Per-user connection indicators; ``x`` for the BS, ``y`` for the AP."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x)
        y = np.asarray(self.y)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-D of equal length")
        for name, v in (("x", x), ("y", y)):
            if not np.all((v == 0) | (v == 1)):
                raise ValueError(f"{name} must be binary")
        x = _frozen(x, dtype=np.int8)
        y = _frozen(y, dtype=np.int8)
        if np.any(x + y > 1):
            raise ValueError("a user cannot connect to both the BS and the AP")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return int(self.x.size)

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    def __hash__(self):
        return hash((self.x.tobytes(), self.y.tobytes()))

    def __repr__(self):
        return f"Assignment(x={self.x.tolist()}, y={self.y.tolist()})"

    @classmethod
    def all_bs(cls, n: int) -> "Assignment":
        return cls(np.ones(n, dtype=np.int8), np.zeros(n, dtype=np.int8))

    @classmethod
    def all_ap(cls, n: int) -> "Assignment":
        return cls(np.zeros(n, dtype=np.int8), np.ones(n, dtype=np.int8))

    def permuted(self, order: Sequence[int]) -> "Assignment":
        order = np.asarray(order, dtype=int)
        return Assignment(self.x[order], self.y[order])

    def to_string(self) -> str:
        """Compact per-user code: ``B`` (BS), ``A`` (AP) or ``-`` (off)."""
        return "".join("B" if xi else ("A" if yi else "-") for xi, yi in zip(self.x, self.y))

    @classmethod
    def from_string(cls, code: str) -> "Assignment":
        if set(code) - set("BA-"):
            raise ValueError(f"invalid assignment code {code!r}")
        x = [1 if c == "B" else 0 for c in code]
        y = [1 if c == "A" else 0 for c in code]
        return cls(x, y)


class SicMode(enum.Enum):
    """Which receivers run a SIC decoder: first letter BS, second AP."""

    WW = "ww"
    OO = "oo"
    WO = "wo"
    OW = "ow"

    @property
    def bs_sic(self) -> bool:
        return self.value[0] == "w"

    @property
    def ap_sic(self) -> bool:
        return self.value[1] == "w"


@dataclass(frozen=True)
class UtilityBreakdown:
    rate_bs: float
    rate_ap: float
    utility: float


def _check_pair(snr, mask):
    snr = np.asarray(snr, dtype=float)
    mask = np.asarray(mask)
    if snr.shape != mask.shape or snr.ndim != 1:
        raise ValueError(f"snr and mask must be 1-D of equal length, got {snr.shape} and {mask.shape}")
    if np.any(snr <= 0):
        raise ValueError("snr entries must be > 0")
    return snr, mask.astype(bool)


def sum_rate_sic(snr, mask) -> float:
    """Multiple-access sum rate with successive interference cancellation."""
    snr, mask = _check_pair(snr, mask)
    return float(np.log1p(snr[mask].sum()))


def sum_rate_no_sic(snr, mask) -> float:
    """Sum of per-user rates when every other active user is treated as noise."""
    snr, mask = _check_pair(snr, mask)
    active = snr[mask]
    if active.size == 0:
        return 0.0
    interference = active.sum() - active
    return float(np.sum(np.log1p(active / (interference + 1.0))))


def utility(scenario: ScenarioRealization, assignment: Assignment, mode: SicMode) -> UtilityBreakdown:
    """Operator utility ``lam * R_B + (lam - mu) * R_A`` under the given receivers."""
    if len(assignment) != scenario.n_users:
        raise ValueError(
            f"assignment has {len(assignment)} users, scenario has {scenario.n_users}"
        )
    rate_b = (sum_rate_sic if mode.bs_sic else sum_rate_no_sic)(scenario.snr_bs, assignment.x)
    rate_a = (sum_rate_sic if mode.ap_sic else sum_rate_no_sic)(scenario.snr_ap, assignment.y)
    p = scenario.params
    return UtilityBreakdown(rate_b, rate_a, p.lam * rate_b + p.ap_weight * rate_a)
