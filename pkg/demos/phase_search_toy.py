"""Phase search on a single panel small enough to enumerate.

Two links share one 2x2 panel with 2-bit phases, so all 4**4 = 256
configurations can be scored. The search only accepts changes that keep
every SINR floor the start meets, so it is compared with the best such
configuration as well as the unconstrained best.
"""

import itertools

import numpy as np

from risd2d import Partition, PhaseConfig, SimParams, State, System, draw_channels, generate_scenario, system_sum_rate
from risd2d.phase_search import is_one_opt, optimize_phases

for seed in range(5):
    params = SimParams(N=2, e=2)
    scenario = generate_scenario(params, C=1, D=1, seed=seed)
    system = System(scenario, draw_channels(scenario, seed), assist=np.zeros(2, int))
    part = Partition([0], 1)
    start = State(part, system.caps(part), PhaseConfig.random(np.random.default_rng(seed), 2, (8, 2, 2), system.assist))

    def score(state):
        gains = system.gains(state.phases)
        ok = system.sinr_ok(gains.sinr(state.partition, state.power))
        return system_sum_rate(state, system), ok

    found = start.with_(phases=optimize_phases(start, system))
    _, ok0 = score(start)
    best = best_ok = 0.0
    for combo in itertools.product(range(4), repeat=4):
        index = np.array(start.phases.index)
        index[0] = np.reshape(combo, (2, 2))
        rate, ok = score(start.with_(phases=start.phases.with_index(index)))
        best = max(best, rate)
        if np.all(ok | ~ok0):
            best_ok = max(best_ok, rate)
    print(
        f"seed {seed}: start {system_sum_rate(start, system) / 1e6:7.1f} Mbit/s, "
        f"search {system_sum_rate(found, system) / 1e6:7.1f}, best admissible {best_ok / 1e6:7.1f}, "
        f"best unconstrained {best / 1e6:7.1f}, "
        f"1-opt {is_one_opt(found, system)}"
    )
