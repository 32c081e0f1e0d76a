"""Parameter sweeps, Monte-Carlo averaging and CSV persistence.

Seeding: repetition ``r`` of a sweep with master seed ``s`` uses the run seed
``derive_seed(s, r)``, the same for every axis value and every scheme, so all
schemes (and all points of an axis) are compared on common random
instances. A run seed ``x`` expands through ``SeedSequence(x)`` into three
children: scenario, channels and solver. ``solve --seed x`` reproduces any
CSV row.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .channel import draw_channels
from .optimizer import SchemeId, SolveResult, maximize_sum_rate
from .params import SimParams
from .scenario import generate_scenario

AXES = {
    "cellular_users": "C",
    "d2d_pairs": "D",
    "ris_side_N": "N",
    "quant_bits_e": "e",
}
CSV_HEADER = ["axis", "scheme", "seed", "sum_rate_bps", "iterations", "feasible", "wall_time_s"]
SUMMARY_HEADER = ["axis", "scheme", "runs", "mean_sum_rate_bps", "stderr_bps", "pa_gain_pct"]


def derive_seed(master: int, rep: int) -> int:
    """Run seed for repetition ``rep``; a pure function of its arguments."""
    return int(np.random.SeedSequence([master, rep]).generate_state(1, np.uint32)[0])


@dataclass(frozen=True)
class ExperimentSpec:
    sweep_axis: str
    axis_values: tuple
    schemes: tuple = tuple(SchemeId)
    seeds: int = 20
    master_seed: int = 0
    C: int = 5
    D: int = 10
    N: int = 4
    e: int = 3
    params_override: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sweep_axis not in AXES:
            raise ValueError(f"unknown axis {self.sweep_axis!r}; choose from {', '.join(AXES)}")
        values = tuple(int(v) for v in self.axis_values)
        if not values:
            raise ValueError("axis_values must be non-empty")
        if self.seeds < 1:
            raise ValueError("need at least one seed")
        object.__setattr__(self, "axis_values", values)
        object.__setattr__(self, "schemes", tuple(SchemeId.parse(s) if isinstance(s, str) else SchemeId(s) for s in self.schemes))

    def point(self, value: int) -> tuple[SimParams, int, int]:
        """``(params, C, D)`` for one axis value."""
        dims = {"C": self.C, "D": self.D, "N": self.N, "e": self.e}
        dims[AXES[self.sweep_axis]] = value
        params = SimParams.from_dict({**self.params_override, "N": dims["N"], "e": dims["e"]})
        return params, dims["C"], dims["D"]


@dataclass(frozen=True)
class ResultRecord:
    axis_value: int
    scheme: str
    seed: int
    sum_rate: float
    iterations: int
    feasible: bool
    wall_time: float

    def row(self) -> list[str]:
        return [
            str(self.axis_value),
            self.scheme,
            str(self.seed),
            repr(float(self.sum_rate)),
            str(self.iterations),
            "true" if self.feasible else "false",
            repr(float(self.wall_time)),
        ]

    @classmethod
    def from_row(cls, row: dict) -> "ResultRecord":
        return cls(
            axis_value=int(row["axis"]),
            scheme=row["scheme"],
            seed=int(row["seed"]),
            sum_rate=float(row["sum_rate_bps"]),
            iterations=int(row["iterations"]),
            feasible=row["feasible"] == "true",
            wall_time=float(row["wall_time_s"]),
        )


def solve_instance(params: SimParams, C: int, D: int, scheme, seed: int) -> SolveResult:
    """Scenario, channels and solve for one run seed."""
    s_scen, s_chan, s_solve = np.random.SeedSequence(seed).spawn(3)
    scenario = generate_scenario(params, C, D, s_scen)
    channels = draw_channels(scenario, s_chan)
    return maximize_sum_rate(scenario, channels, scheme, s_solve)


def iter_runs(spec: ExperimentSpec) -> Iterator[tuple[int, SchemeId, int]]:
    """Canonical run order: axis value, then scheme, then repetition."""
    for value in spec.axis_values:
        for scheme in spec.schemes:
            for rep in range(spec.seeds):
                yield value, scheme, derive_seed(spec.master_seed, rep)


def _run_one(spec: ExperimentSpec, value: int, scheme: SchemeId, seed: int, trace_dir: Path | None) -> ResultRecord:
    t0 = time.perf_counter()
    try:
        params, C, D = spec.point(value)
        res = solve_instance(params, C, D, scheme, seed)
    except (ValueError, FloatingPointError, np.linalg.LinAlgError):
        return ResultRecord(value, scheme.value, seed, math.nan, 0, False, time.perf_counter() - t0)
    wall = time.perf_counter() - t0
    if trace_dir is not None:
        stem = trace_dir / f"{spec.sweep_axis}-{value}_{scheme.value}_{seed}"
        stem.with_suffix(".json").write_text(res.to_json(indent=1))
        with open(stem.with_suffix(".jsonl"), "w") as fh:
            res.write_trace(fh)
    return ResultRecord(value, scheme.value, seed, res.sum_rate, res.iterations, res.feasible, wall)


def run_sweep(spec: ExperimentSpec, out: str | Path | IO[str] | None = None, trace_dir=None, progress=None) -> list[ResultRecord]:
    """Run every (axis value, scheme, repetition); rows are written to ``out`` as they finish.

    A run that raises is recorded as an infeasible row with a NaN rate.
    """
    trace_dir = Path(trace_dir) if trace_dir is not None else None
    if trace_dir is not None:
        trace_dir.mkdir(parents=True, exist_ok=True)
    fh, close = _open(out)
    writer = csv.writer(fh, lineterminator="\n") if fh else None
    if writer:
        writer.writerow(CSV_HEADER)
    records = []
    try:
        for value, scheme, seed in iter_runs(spec):
            rec = _run_one(spec, value, scheme, seed, trace_dir)
            records.append(rec)
            if writer:
                writer.writerow(rec.row())
                fh.flush()
            if progress is not None:
                progress(rec)
    finally:
        if close:
            fh.close()
    return records


def _open(out):
    if out is None:
        return None, False
    if hasattr(out, "write"):
        return out, False
    return open(out, "w", newline=""), True


def write_records(records: Iterable[ResultRecord], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row())


def read_records(fh: IO[str]) -> list[ResultRecord]:
    reader = csv.DictReader(fh)
    if reader.fieldnames != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [ResultRecord.from_row(row) for row in reader]


@dataclass(frozen=True)
class SummaryRow:
    axis_value: int
    scheme: str
    runs: int
    mean: float
    stderr: float
    pa_gain_pct: float  # (mean PA - mean this) / mean this * 100; NaN without PA rows

    def row(self) -> list[str]:
        return [str(self.axis_value), self.scheme, str(self.runs), repr(self.mean), repr(self.stderr), repr(self.pa_gain_pct)]


def improvement(mean_pa: float, mean_other: float) -> float:
    return (mean_pa - mean_other) / mean_other * 100.0


def summarize(records: Sequence[ResultRecord]) -> list[SummaryRow]:
    """Mean and standard error per (axis value, scheme), plus PA's gain over each scheme.

    Failed runs (NaN rate) are left out of the averages.
    """
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple[int, str], list[float]] = {}
    for rec in records:
        groups.setdefault((rec.axis_value, rec.scheme), [])
        if not math.isnan(rec.sum_rate):
            groups[(rec.axis_value, rec.scheme)].append(rec.sum_rate)
    means = {}
    rows = []
    for (value, scheme), rates in groups.items():
        x = np.asarray(rates)
        mean = float(x.mean()) if x.size else math.nan
        stderr = float(x.std(ddof=1) / np.sqrt(x.size)) if x.size > 1 else math.nan
        means[(value, scheme)] = mean
        rows.append((value, scheme, x.size, mean, stderr))
    out = []
    for value, scheme, n, mean, stderr in rows:
        pa = means.get((value, SchemeId.PA.value), math.nan)
        out.append(SummaryRow(value, scheme, n, mean, stderr, improvement(pa, mean)))
    return out


def write_summary(rows: Iterable[SummaryRow], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for r in rows:
        writer.writerow(r.row())
