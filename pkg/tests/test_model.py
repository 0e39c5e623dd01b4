import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from offloadsim import (
    Assignment,
    ScenarioRealization,
    SicMode,
    SystemParams,
    sum_rate_no_sic,
    sum_rate_sic,
    utility,
)


def no_sic_loop(snr, mask):
    # scalar oracle, written straight from the per-user rate definition
    total = 0.0
    for i, (s, m) in enumerate(zip(snr, mask)):
        if not m:
            continue
        interference = sum(snr[j] for j in range(len(snr)) if j != i and mask[j])
        total += math.log(1 + s / (interference + 1))
    return total


@pytest.mark.parametrize(
    "snr, mask, expected",
    [
        ([3.0], [0], 0.0),
        ([3.0], [1], math.log(4)),
        ([1.0, 2.0, 3.0], [1, 0, 1], math.log(5)),
    ],
)
def test_sum_rate_sic_examples(snr, mask, expected):
    assert sum_rate_sic(snr, mask) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_sum_rate_no_sic_examples():
    assert sum_rate_no_sic([5.0], [1]) == pytest.approx(math.log(6), rel=1e-12)
    assert sum_rate_no_sic([1.0, 1.0], [1, 1]) == pytest.approx(2 * math.log(1.5), rel=1e-12)
    three = sum_rate_no_sic([0.5, 0.4, 0.3], [1, 1, 1])
    assert three == pytest.approx(no_sic_loop([0.5, 0.4, 0.3], [1, 1, 1]), rel=1e-12)
    # frozen from the scalar oracle
    assert three == pytest.approx(0.605103278956, abs=1e-11)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        sum_rate_sic([1.0, 2.0], [1])
    with pytest.raises(ValueError):
        sum_rate_no_sic([1.0], [1, 0])
    sc = ScenarioRealization(SystemParams(), [1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        utility(sc, Assignment([1], [0]), SicMode.WW)


def test_utility_examples():
    sc = ScenarioRealization(SystemParams(lam=1, mu=0.5), [3.0], [8.0])
    assert utility(sc, Assignment([1], [0]), SicMode.WW).utility == pytest.approx(math.log(4))
    assert utility(sc, Assignment([0], [1]), SicMode.WW).utility == pytest.approx(0.5 * math.log(9))
    sc2 = ScenarioRealization(SystemParams(lam=1, mu=0.5), [3.0, 1.0], [1.0, 4.0])
    b = utility(sc2, Assignment([1, 0], [0, 1]), SicMode.WW)
    assert b.rate_bs == pytest.approx(math.log(4))
    assert b.rate_ap == pytest.approx(math.log(5))
    assert b.utility == pytest.approx(2.191013317337, abs=1e-11)


def test_utility_breakdown_identity():
    sc = ScenarioRealization(SystemParams(lam=2.0, mu=0.7), [3.0, 1.0, 0.2], [1.0, 4.0, 2.0])
    for mode in SicMode:
        b = utility(sc, Assignment([1, 0, 0], [0, 1, 1]), mode)
        assert b.utility == 2.0 * b.rate_bs + (2.0 - 0.7) * b.rate_ap
        assert b.rate_bs >= 0 and b.rate_ap >= 0


def test_snr_cached_from_gains():
    p = SystemParams(power=2.0, noise_bs=0.5, noise_ap=4.0)
    sc = ScenarioRealization(p, [1.0, 3.0], [2.0, 8.0])
    np.testing.assert_allclose(sc.snr_bs, [4.0, 12.0], rtol=1e-12)
    np.testing.assert_allclose(sc.snr_ap, [1.0, 4.0], rtol=1e-12)
    with pytest.raises(ValueError):
        sc.snr_bs[0] = 1.0


@pytest.mark.parametrize(
    "kwargs", [dict(lam=0.0), dict(mu=-0.1), dict(power=0.0), dict(noise_bs=0.0), dict(noise_ap=-1.0)]
)
def test_system_params_invariants(kwargs):
    with pytest.raises(ValueError):
        SystemParams(**kwargs)


def test_scenario_invariants():
    with pytest.raises(ValueError):
        ScenarioRealization(SystemParams(), [1.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        ScenarioRealization(SystemParams(), [1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        ScenarioRealization(SystemParams(), [], [])


def test_assignment_invariants():
    with pytest.raises(ValueError):
        Assignment([1, 1], [0, 1])
    with pytest.raises(ValueError):
        Assignment([2], [0])
    a = Assignment.from_string("BA-")
    assert a.x.tolist() == [1, 0, 0] and a.y.tolist() == [0, 1, 0]
    assert a.to_string() == "BA-"


snr_lists = st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=12)


@given(snr_lists, st.data())
@settings(max_examples=200, deadline=None)
def test_sic_rate_dominates_no_sic(snr, data):
    mask = data.draw(st.lists(st.integers(0, 1), min_size=len(snr), max_size=len(snr)))
    sic = sum_rate_sic(snr, mask)
    plain = sum_rate_no_sic(snr, mask)
    assert sic >= plain - 1e-12
    if sum(mask) <= 1:
        assert sic == pytest.approx(plain, rel=1e-12, abs=1e-15)
    assert plain == pytest.approx(no_sic_loop(snr, mask), rel=1e-10, abs=1e-15)


@given(snr_lists, st.data())
@settings(max_examples=100, deadline=None)
def test_sic_rate_monotone(snr, data):
    mask = data.draw(st.lists(st.integers(0, 1), min_size=len(snr), max_size=len(snr)))
    off = [i for i, m in enumerate(mask) if not m]
    if not off:
        return
    flipped = list(mask)
    flipped[data.draw(st.sampled_from(off))] = 1
    assert sum_rate_sic(snr, flipped) > sum_rate_sic(snr, mask)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_utility_permutation_invariant_and_ww_wo_agree(n, seed):
    rng = np.random.default_rng(seed)
    sc = ScenarioRealization(SystemParams(), rng.exponential(1.0, n) + 1e-9, rng.exponential(1.0, n) + 1e-9)
    state = rng.integers(0, 3, n)
    a = Assignment(state == 1, state == 2)
    order = rng.permutation(n)
    for mode in SicMode:
        assert utility(sc, a, mode).utility == pytest.approx(
            utility(sc.permuted(order), a.permuted(order), mode).utility, rel=1e-12
        )
    bs_only = Assignment(state == 1, np.zeros(n, dtype=int))
    assert utility(sc, bs_only, SicMode.WW).utility == utility(sc, bs_only, SicMode.WO).utility
