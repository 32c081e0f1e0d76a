"""Average every scheme over a handful of common random instances.

    python3 demos/compare_schemes.py [seeds]
"""

import sys

from risd2d import ExperimentSpec, run_sweep, summarize

seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 4
spec = ExperimentSpec("cellular_users", (5,), seeds=seeds)
records = run_sweep(spec, progress=lambda r: print(f"  {r.scheme:6s} seed {r.seed}: {r.sum_rate / 1e9:.2f} Gbit/s", flush=True))

print(f"\n{'scheme':8s}{'mean Gbit/s':>12s}{'stderr':>9s}{'PA gain':>10s}")
for row in summarize(records):
    print(f"{row.scheme:8s}{row.mean / 1e9:12.2f}{row.stderr / 1e9:9.2f}{row.pa_gain_pct:9.1f}%")
