"""Seeded channel realizations: path loss over the unit square, Rayleigh and Nakagami-m.

Every realization comes from its own ``numpy.random.PCG64`` stream seeded
with a 64-bit integer; per-trial seeds are derived with a splitmix64
finalizer so trials can run in any order or in parallel.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .model import ScenarioRealization, SystemParams

PRNG_NAME = "numpy.random.PCG64"
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class PathLoss:
    alpha: float = 1.0
    gamma: float = 2.0
    name = "pathloss"

    def __post_init__(self):
        if not (self.alpha > 0 and self.gamma > 0):
            raise ValueError("path loss needs alpha > 0 and gamma > 0")


@dataclass(frozen=True)
class Rayleigh:
    mean: float = 1.0
    name = "rayleigh"

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError("mean gain must be > 0")


@dataclass(frozen=True)
class NakagamiM:
    m: float = 2.0
    mean: float = 1.0
    name = "nakagami"

    def __post_init__(self):
        if not self.m >= 0.5:
            raise ValueError("Nakagami m must be >= 0.5")
        if not self.mean > 0:
            raise ValueError("mean gain must be > 0")


ChannelModel = Union[PathLoss, Rayleigh, NakagamiM]


def model_label(model: ChannelModel) -> str:
    if isinstance(model, PathLoss):
        return f"pathloss(alpha={model.alpha:g},gamma={model.gamma:g})"
    if isinstance(model, Rayleigh):
        return f"rayleigh(mean={model.mean:g})"
    return f"nakagami(m={model.m:g},mean={model.mean:g})"


def parse_model(text: str) -> ChannelModel:
    """Parse ``"pathloss"``, ``"rayleigh:mean=2"``, ``"nakagami:m=2,mean=1"`` and similar."""
    name, _, args = text.strip().partition(":")
    kwargs = {}
    for item in filter(None, args.split(",")):
        key, _, value = item.partition("=")
        kwargs[key.strip()] = float(value)
    kinds = {"pathloss": PathLoss, "rayleigh": Rayleigh, "nakagami": NakagamiM}
    try:
        return kinds[name.strip().lower()](**kwargs)
    except KeyError:
        raise ValueError(f"unknown channel model {name!r}") from None
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name!r}: {exc}") from None


@dataclass(frozen=True)
class GeneratorConfig:
    n_users: int
    model: ChannelModel = field(default_factory=PathLoss)
    params: SystemParams = field(default_factory=SystemParams)
    seed: int = 0
    bs_position: tuple = (0.0, 0.0)
    ap_position: tuple = (1.0, 1.0)

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")


def splitmix64(value: int) -> int:
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_trial_seed(base_seed: int, trial_index: int) -> int:
    """``splitmix64(base_seed XOR trial_index)``; a bijection in ``trial_index``."""
    return splitmix64((int(base_seed) ^ int(trial_index)) & _MASK64)


def path_loss_gains(positions, point, alpha: float = 1.0, gamma: float = 2.0) -> np.ndarray:
    d = np.hypot(*(np.asarray(positions, dtype=float) - np.asarray(point, dtype=float)).T)
    return alpha * d ** (-gamma)


def scenario_from_positions(
    positions,
    params: SystemParams = SystemParams(),
    model: PathLoss = PathLoss(),
    bs_position=(0.0, 0.0),
    ap_position=(1.0, 1.0),
) -> ScenarioRealization:
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    return ScenarioRealization(
        params,
        path_loss_gains(positions, bs_position, model.alpha, model.gamma),
        path_loss_gains(positions, ap_position, model.alpha, model.gamma),
        positions,
    )


def _sample_positions(rng, n, bs, ap) -> np.ndarray:
    # row-major draw: user 0 x, user 0 y, user 1 x, ...
    pos = rng.random((n, 2))
    for i in range(n):
        while np.array_equal(pos[i], bs) or np.array_equal(pos[i], ap):
            pos[i] = rng.random(2)
    return pos


def generate(config: GeneratorConfig) -> ScenarioRealization:
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = config.n_users
    model = config.model
    if isinstance(model, PathLoss):
        bs = np.asarray(config.bs_position, dtype=float)
        ap = np.asarray(config.ap_position, dtype=float)
        pos = _sample_positions(rng, n, bs, ap)
        return scenario_from_positions(pos, config.params, model, bs, ap)
    if isinstance(model, Rayleigh):
        g_b = rng.exponential(model.mean, n)
        g_a = rng.exponential(model.mean, n)
    elif isinstance(model, NakagamiM):
        g_b = rng.gamma(model.m, model.mean / model.m, n)
        g_a = rng.gamma(model.m, model.mean / model.m, n)
    else:
        raise TypeError(f"unsupported channel model {model!r}")
    # exact zeros are possible in principle for float64 draws
    for g in (g_b, g_a):
        g[g <= 0] = np.finfo(float).tiny
    return ScenarioRealization(config.params, g_b, g_a)


def dumps_scenario(scenario: ScenarioRealization) -> str:
    """Plain-text record: one header line of constants, then one user per line.

    User lines are ``index g_bs g_ap`` or ``index pos_x pos_y g_bs g_ap``;
    floats are written with ``repr`` so a round trip is exact.
    """
    p = scenario.params
    out = io.StringIO()
    out.write("# offloadsim scenario v1\n")
    out.write(
        f"# lam={p.lam!r} mu={p.mu!r} power={p.power!r} noise_bs={p.noise_bs!r} noise_ap={p.noise_ap!r}\n"
    )
    has_pos = scenario.positions is not None
    out.write("# index pos_x pos_y g_bs g_ap\n" if has_pos else "# index g_bs g_ap\n")
    for i in range(scenario.n_users):
        fields = [str(i)]
        if has_pos:
            fields += [repr(float(v)) for v in scenario.positions[i]]
        fields += [repr(float(scenario.gains_bs[i])), repr(float(scenario.gains_ap[i]))]
        out.write(" ".join(fields) + "\n")
    return out.getvalue()


def loads_scenario(text: str) -> ScenarioRealization:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# offloadsim scenario"):
        raise ValueError("not an offloadsim scenario record")
    consts = dict(item.split("=") for item in lines[1].lstrip("# ").split())
    params = SystemParams(**{k: float(v) for k, v in consts.items()})
    rows = [ln.split() for ln in lines[3:] if ln.strip() and not ln.startswith("#")]
    for expected, row in enumerate(rows):
        if int(row[0]) != expected:
            raise ValueError(f"user lines out of order at index {row[0]}")
    values = np.array([[float(v) for v in row[1:]] for row in rows])
    if values.shape[1] == 4:
        return ScenarioRealization(params, values[:, 2], values[:, 3], values[:, :2])
    if values.shape[1] == 2:
        return ScenarioRealization(params, values[:, 0], values[:, 1])
    raise ValueError("user lines must have 3 or 5 fields")


def dump_scenario(scenario: ScenarioRealization, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_scenario(scenario), encoding="utf-8", newline="\n")


def load_scenario(path: Union[str, Path]) -> ScenarioRealization:
    return loads_scenario(Path(path).read_text(encoding="utf-8"))
