"""Optimize one random deployment and show what each block contributes.

    python3 demos/single_instance.py [seed]
"""

import sys

import numpy as np

from risd2d import SimParams, draw_channels, generate_scenario, maximize_sum_rate

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
params = SimParams()
scenario = generate_scenario(params, C=5, D=10, seed=seed)
channels = draw_channels(scenario, seed)

res = maximize_sum_rate(scenario, channels, "PA", seed)
print(f"start (all pairs on mm-wave, caps, random phases): {res.initial_rate / 1e9:.3f} Gbit/s")
for row in res.trace:
    print(
        f"iter {row['iteration']:2d}: {row['switches']:2d} switches -> {row['after_coalition'] / 1e9:.3f}, "
        f"power -> {row['after_power'] / 1e9:.3f}, phases -> {row['sum_rate'] / 1e9:.3f} Gbit/s, "
        f"{row['violations']} SINR violations"
    )
print(f"stopped: {res.reason} after {res.iterations} iterations")

labels = ["mm" if m == scenario.C else f"c{m}" for m in res.partition.mode]
print("pair modes:", " ".join(labels))
dbm = [f"{10 * np.log10(p * 1e3):.1f}" if p > 0 else "off" for p in res.power]
print("powers (dBm), pairs then cellular users:", " ".join(dbm))
