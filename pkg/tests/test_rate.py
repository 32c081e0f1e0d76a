import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from risd2d.params import SimParams
from risd2d.rate import (
    Partition,
    State,
    compute_sinr,
    coalition_utility,
    is_feasible,
    link_rate,
    no_new_violations,
    system_sum_rate,
)
from risd2d.ris import PhaseConfig

from conftest import hand_system, make_system, random_state
from oracles import sinr_loop


def zero_phases(system):
    p = system.params
    return PhaseConfig(p.e, np.zeros((p.M, p.N, p.N), int), system.assist)


def channel_dict(system):
    ch = system.channels
    return {
        "g_direct": ch.g_direct,
        "g_refl": ch.g_refl,
        "h_direct": ch.h_direct,
        "h_refl": ch.h_refl,
        "sigma2_c": ch.sigma2_c,
        "sigma2_m": ch.sigma2_m,
    }


def test_sole_link_snr():
    sys = hand_system(0, 1, h=0.5 + 0.5j, sigma2_m=0.2)
    st_ = State(Partition([0], 0), np.array([0.3]), zero_phases(sys))
    assert compute_sinr(0, st_, sys) == pytest.approx(0.5 * 0.3 / 0.2)


def test_symmetric_mmwave_pair():
    sys = hand_system(0, 2, h=2.0, sigma2_m=0.5)
    st_ = State(Partition([0, 0], 0), np.array([1.5, 1.5]), zero_phases(sys))
    expect = 4 * 1.5 / (4 * 1.5 + 0.5)
    for i in range(2):
        assert compute_sinr(i, st_, sys) == pytest.approx(expect)
        assert compute_sinr(i, st_, sys) < 1


def test_three_link_unit_fixture():
    # two pairs sharing cellular user 0's band, unit channels, unit noise
    sys = hand_system(1, 2, g=1.0, sigma2_c=1.0)
    st_ = State(Partition([0, 0], 1), np.array([1.0, 2.0, 3.0]), zero_phases(sys))
    got = [compute_sinr(i, st_, sys) for i in range(3)]
    np.testing.assert_allclose(got, [1 / 6, 2 / 5, 3 / 4])
    ch = channel_dict(sys)
    ang = np.zeros((8, 1, 1))
    want = [sinr_loop(i, [0, 0], [1, 2, 3], ang, ch, sys.assist, 1.0, 0.8, 1, 2) for i in range(3)]
    np.testing.assert_allclose(got, want, rtol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_sinr_matches_loop_oracle_on_drawn_channels(seed):
    sys = make_system(C=2, D=3, seed=seed, N=2)
    rng = np.random.default_rng(seed)
    st_ = random_state(sys, rng)
    ch = channel_dict(sys)
    for i in range(sys.L):
        want = sinr_loop(i, st_.partition.mode, st_.power, st_.phases.angles, ch, sys.assist, 1.0, 0.8, 2, 3)
        assert compute_sinr(i, st_, sys) == pytest.approx(want, rel=1e-10)


def test_link_rate_examples():
    p = SimParams()
    assert link_rate(0.0, p) == 0.0
    assert link_rate(1.0, p, "cellular") == pytest.approx(22e6)
    assert link_rate(3.0, p, "mmwave") == pytest.approx(4.32e9)
    with pytest.raises(ValueError):
        link_rate(-0.1, p)


def test_outage_weighting():
    sys = hand_system(0, 1, h=1.0, sigma2_m=1.0, p_out=[1 - np.exp(-1.0)])
    st_ = State(Partition([0], 0), np.array([3.0]), zero_phases(sys))
    assert system_sum_rate(st_, sys) == pytest.approx(np.exp(-1.0) * 2160e6 * 2.0)
    full = hand_system(0, 1, h=1.0, sigma2_m=1.0, p_out=[0.0])
    assert system_sum_rate(st_, full) == pytest.approx(2160e6 * 2.0)


def test_sum_is_sum_of_link_rates():
    sys = hand_system(1, 2, g=1.0, sigma2_c=1.0)
    st_ = State(Partition([0, 1], 1), np.array([1.0, 2.0, 3.0]), zero_phases(sys))
    total = sum(
        link_rate(compute_sinr(i, st_, sys), sys.params, "mmwave" if i == 1 else "cellular") for i in range(3)
    )
    assert system_sum_rate(st_, sys) == pytest.approx(total)


def test_empty_coalitions():
    sys = hand_system(2, 1, g=2.0, sigma2_c=1.0)
    st_ = State(Partition([2], 2), np.array([0.1, 0.5, 0.5]), zero_phases(sys))
    # coalition 0 has no pairs: owner alone at SNR 4 * 0.5
    assert coalition_utility(0, st_, sys) == pytest.approx(22e6 * np.log2(1 + 2.0))
    st2 = State(Partition([0], 2), np.array([0.1, 0.5, 0.5]), zero_phases(sys))
    assert coalition_utility(2, st2, sys) == 0.0


@given(st.integers(0, 2**31), st.integers(0, 3), st.integers(1, 4))
def test_partition_additivity(seed, C, D):
    sys = make_system(C=C, D=D, seed=seed % 1000, N=1)
    st_ = random_state(sys, np.random.default_rng(seed))
    total = sum(coalition_utility(k, st_, sys) for k in range(C + 1))
    assert total == pytest.approx(system_sum_rate(st_, sys), rel=1e-12)


def test_coalition_utility_matches_restricted_sum():
    sys = make_system(C=2, D=4, seed=1, N=2)
    part = Partition([0, 0, 2, 1], 2)
    st_ = random_state(sys, np.random.default_rng(0), part)
    rates = sys.gains(st_.phases).link_rates(part, st_.power)
    assert coalition_utility(0, st_, sys) == pytest.approx(rates[[0, 1, 4]].sum())
    assert coalition_utility(2, st_, sys) == pytest.approx(rates[2])


@given(st.integers(0, 10**6), st.floats(1.01, 10))
def test_interferer_power_lowers_sinr(seed, factor):
    sys = make_system(C=1, D=3, seed=seed % 500, N=1)
    part = Partition([0, 0, 1], 1)
    st_ = random_state(sys, np.random.default_rng(seed), part)
    base = sys.gains(st_.phases).sinr(part, st_.power)
    power = st_.power.copy()
    power[1] *= factor
    after = sys.gains(st_.phases).sinr(part, power)
    assert after[0] < base[0] and after[3] < base[3]  # same-band neighbours
    assert after[2] == base[2]  # mm-wave pair is unaffected


def test_partition_structure():
    part = Partition([0, 2, 2, 1], 2)
    assert part.coalitions() == [(0,), (3,), (1, 2)]
    assert part.owner(0) == 0 and part.owner(2) is None
    X = part.assignment_matrix()
    assert X.shape == (2, 4) and np.all(X.sum(axis=0) <= 1)
    np.testing.assert_array_equal(part.link_ids(0), [0, 4])
    np.testing.assert_array_equal(part.link_ids(2), [1, 2])
    assert part.switch(0, 2) == Partition([2, 2, 2, 1], 2)
    with pytest.raises(ValueError):
        Partition([3], 2)
    with pytest.raises(ValueError):
        part.mode[0] = 1


def test_feasibility_predicates():
    sys = hand_system(0, 2, h=1.0, sigma2_m=1.0)
    ok = State(Partition([0, 0], 0), np.array([10.0, 0.1]), zero_phases(sys))
    assert not is_feasible(ok, sys)
    alone = hand_system(0, 1, h=1.0, sigma2_m=1.0)
    assert is_feasible(State(Partition([0], 0), np.array([5.0]), zero_phases(alone)), alone)
    assert no_new_violations(np.array([True, False]), np.array([True, False]))
    assert no_new_violations(np.array([True, True]), np.array([False, False]))
    assert not no_new_violations(np.array([False, True]), np.array([True, True]))
