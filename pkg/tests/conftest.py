import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from risd2d.channel import draw_channels
from risd2d.params import SimParams
from risd2d.rate import Partition, State, System
from risd2d.ris import PhaseConfig
from risd2d.scenario import generate_scenario

settings.register_profile("ci", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def make_system(C=2, D=3, seed=0, **overrides):
    params = SimParams(**overrides)
    scenario = generate_scenario(params, C, D, seed)
    channels = draw_channels(scenario, seed + 100)
    return System(scenario, channels)


def random_state(system, rng, partition=None):
    p = system.params
    if partition is None:
        partition = Partition(rng.integers(0, system.C + 1, size=system.D), system.C)
    power = system.caps(partition) * rng.uniform(0.05, 1.0, size=system.L)
    phases = PhaseConfig.random(rng, p.e, (p.M, p.N, p.N), system.assist, p.codebook)
    return State(partition, power, phases)


@pytest.fixture
def small_system():
    return make_system(C=2, D=3, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def hand_system(C, D, *, g=1.0, h=1.0, sigma2_c=1.0, sigma2_m=1.0, p_out=None, N=1, seed=0, **overrides):
    """System on a random geometry with hand-set channels.

    ``g``/``h`` fill the direct cellular/mm-wave tensors (scalars or arrays);
    reflections are zero unless set afterwards.
    """
    from risd2d.channel import ChannelRealization

    params = SimParams(N=N, **overrides)
    scenario = generate_scenario(params, C, D, seed)
    M = params.M
    ch = ChannelRealization(
        g_direct=np.broadcast_to(np.asarray(g, complex), (D + 1, D + C)).copy(),
        h_direct=np.broadcast_to(np.asarray(h, complex), (D, D)).copy(),
        g_refl=np.zeros((D + 1, D + C, M, N, N), complex),
        h_refl=np.zeros((D, D, M, N, N), complex),
        sigma2_c=sigma2_c,
        sigma2_m=sigma2_m,
        p_out=np.zeros(D + C) if p_out is None else np.asarray(p_out, float),
    )
    return System(scenario, ch)


def two_link_problems(count, start=0):
    """Two-link coalition subproblems from random scenarios, alternating bands.

    A cellular coalition with one D2D member plus its owner, or a mm-wave
    coalition with two pairs. Fixtures where no point of the 0.1-dB grid
    meets both SINR floors are skipped (the grid oracle is undefined there).
    """
    from oracles import grid_power_optimum
    from risd2d.power import coalition_problem

    out = []
    seed = start
    while len(out) < count:
        system = make_system(C=2, D=4, seed=seed)
        rng = np.random.default_rng(seed)
        p = system.params
        phases = PhaseConfig.random(rng, p.e, (p.M, p.N, p.N), system.assist, p.codebook)
        k = 0 if seed % 2 == 0 else 2
        part = Partition([0, 2, 2, 1], 2)
        _, problem = coalition_problem(k, part, system.gains(phases), system)
        seed += 1
        if grid_power_optimum(problem.B, problem.sigma2, problem.p_max, problem.gamma, problem.weights) is not None:
            out.append(problem)
    return out


def one_panel_instance(seed):
    """C=1, D=1 (both links in cellular coalition 0), one serving panel, N=2, e=2."""
    base = make_system(C=1, D=1, seed=seed, N=2, e=2)
    system = System(base.scenario, base.channels, assist=np.zeros(2, int))
    rng = np.random.default_rng(seed)
    part = Partition([0], 1)
    phases = PhaseConfig.random(rng, 2, (8, 2, 2), system.assist)
    return system, State(part, system.caps(part), phases)


def exhaustive_panel_optimum(system, state, panel=0):
    """Best loop-oracle sum rate over every codeword combination of one panel.

    Only configurations that keep every SINR floor the start meets count.
    """
    import itertools

    from oracles import sinr_loop

    ch = system.channels
    raw = dict(g_direct=ch.g_direct, g_refl=ch.g_refl, h_direct=ch.h_direct, h_refl=ch.h_refl,
               sigma2_c=ch.sigma2_c, sigma2_m=ch.sigma2_m)
    p = system.params
    mode = state.partition.mode
    cb = system.codebook
    D, C = system.D, system.C

    def evaluate(index):
        angles = cb[index]
        out = []
        for i in range(system.L):
            s = sinr_loop(i, mode, state.power, angles, raw, system.assist, p.alpha_refl_c, p.alpha_refl_m, C, D)
            mm = i < D and mode[i] == C
            w = (1 - ch.p_out[i]) * p.W_m if mm else p.W_c
            out.append((w * np.log2(1 + s), s >= system.gamma * (1 - 1e-9)))
        return sum(r for r, _ in out), np.array([ok for _, ok in out])

    start_rate, ok0 = evaluate(state.phases.index)
    best = -np.inf
    n = system.N * system.N
    for combo in itertools.product(range(len(cb)), repeat=n):
        idx = np.array(state.phases.index, copy=True)
        idx.reshape(system.M, -1)[panel] = combo
        rate, ok = evaluate(idx)
        if np.all(ok | ~ok0):
            best = max(best, rate)
    return best, start_rate
