"""Block-coordinate sum-rate maximization and the baseline schemes.

Each outer iteration runs coalition formation, then per-coalition power
allocation, then the RIS phase search, and records the system sum rate.
Baselines switch individual blocks off:

=======  ===========================================================
PA       every block
MP       no power allocation, every link transmits at its band cap
RP       no phase search, one random phase draw kept throughout
NonRIS   reflected channels zeroed
NonCG    no coalition formation, random operating modes kept
Fmm      every D2D pair stays in the mm-wave coalition
=======  ===========================================================
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import IO

import numpy as np

from .channel import ChannelRealization
from .coalition import CoalitionTrace, form_coalitions
from .phase_search import optimize_phases
from .power import allocate_power
from .rate import Partition, State, System
from .ris import PhaseConfig
from .scenario import Scenario

RP_REDRAWS = 100


class SchemeId(str, Enum):
    PA = "PA"
    MP = "MP"
    RP = "RP"
    NonRIS = "NonRIS"
    NonCG = "NonCG"
    Fmm = "Fmm"

    @property
    def forms_coalitions(self) -> bool:
        return self not in (SchemeId.NonCG, SchemeId.Fmm)

    @property
    def allocates_power(self) -> bool:
        return self is not SchemeId.MP

    @property
    def searches_phases(self) -> bool:
        return self not in (SchemeId.RP, SchemeId.NonRIS)

    @classmethod
    def parse(cls, name: str) -> "SchemeId":
        for s in cls:
            if s.value.lower() == name.lower():
                return s
        raise ValueError(f"unknown scheme {name!r}; choose from {', '.join(s.value for s in cls)}")


@dataclass
class SolveResult:
    scheme: SchemeId
    partition: Partition
    power: np.ndarray
    phases: PhaseConfig
    sum_rate: float
    iterations: int
    initial_rate: float
    trace: list[dict] = field(default_factory=list)
    feasible: bool = True
    reason: str = "converged"
    violations: int = 0

    @property
    def rates(self) -> list[float]:
        """Sum rate after each outer iteration."""
        return [row["sum_rate"] for row in self.trace]

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "sum_rate_bps": self.sum_rate,
            "initial_rate_bps": self.initial_rate,
            "iterations": self.iterations,
            "feasible": self.feasible,
            "violations": self.violations,
            "reason": self.reason,
            "mode": self.partition.mode.tolist(),
            "num_cellular": self.partition.C,
            "power_w": self.power.tolist(),
            "phases": self.phases.to_dict(),
            "rate_trace": self.rates,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def write_trace(self, fh: IO[str]) -> None:
        for row in self.trace:
            fh.write(json.dumps(row) + "\n")


def _streams(seed) -> dict[str, np.random.Generator]:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    names = ("mode", "phase", "coalition", "redraw")
    return {n: np.random.default_rng(s) for n, s in zip(names, ss.spawn(len(names)))}


def _rank(system: System, state: State) -> tuple[int, float]:
    """(violations, -sum rate); RP redraws use it lexicographically."""
    gains = system.gains(state.phases)
    sinr = gains.sinr(state.partition, state.power)
    return int(np.sum(~system.sinr_ok(sinr))), -gains.sum_rate(state.partition, state.power)


def initial_state(system: System, scheme: SchemeId, rngs: dict[str, np.random.Generator]) -> State:
    """Band-cap powers and random phases.

    Modes are uniformly random for NonCG, all mm-wave for Fmm, and follow
    ``params.initial_modes`` for the other schemes.
    """
    D, C = system.D, system.C
    p = system.params
    modes = rngs["mode"].integers(0, C + 1, size=D)
    if scheme is SchemeId.NonCG or (scheme is not SchemeId.Fmm and p.initial_modes == "random"):
        part = Partition(modes, C)
    else:
        part = Partition.all_mmwave(D, C)
    phases = PhaseConfig.random(rngs["phase"], p.e, (p.M, p.N, p.N), system.assist, p.codebook)
    state = State(part, system.caps(part), phases)
    if scheme is SchemeId.RP:
        state = _draw_random_phases(system, state, rngs["redraw"])
    return state


def _draw_random_phases(system: System, state: State, rng: np.random.Generator) -> State:
    """First feasible draw among the initial one plus up to ``RP_REDRAWS`` redraws, else the best draw."""
    p = system.params
    best, best_key = state, _rank(system, state)
    for _ in range(RP_REDRAWS):
        if best_key[0] == 0:
            break
        phases = PhaseConfig.random(rng, p.e, (p.M, p.N, p.N), system.assist, p.codebook)
        cand = state.with_(phases=phases)
        key = _rank(system, cand)
        if key < best_key:
            best, best_key = cand, key
    return best


def _power_block(system: System, state: State) -> State:
    gains = system.gains(state.phases)
    power = np.array(state.power, dtype=float, copy=True)
    for k in range(system.C + 1):
        new, _ = allocate_power(k, state, system, gains, repair=False)
        ids = state.partition.link_ids(k)
        power[ids] = new[ids]
    return state.with_(power=power)


def run_blocks(system: System, state: State, scheme: SchemeId, rngs, max_outer: int | None = None, epsilon=None):
    """Outer loop from a given state; returns ``(best state, trace, reason)``."""
    p = system.params
    max_outer = p.max_outer if max_outer is None else max_outer
    epsilon = p.epsilon_outer if epsilon is None else epsilon
    best_rate = prev = -_rank(system, state)[1]
    best = state
    trace = []
    reason = "max_outer"
    for it in range(1, max_outer + 1):
        row = {"iteration": it}
        if scheme.forms_coalitions:
            ct = CoalitionTrace()
            state = form_coalitions(state, system, rngs["coalition"], ct)
            row["switches"] = len(ct.events)
            row["after_coalition"] = -_rank(system, state)[1]
        if scheme.allocates_power:
            state = _power_block(system, state)
            row["after_power"] = -_rank(system, state)[1]
        if scheme.searches_phases:
            state = state.with_(phases=optimize_phases(state, system))
        key = _rank(system, state)
        rate = -key[1]
        row.update(sum_rate=rate, violations=key[0])
        trace.append(row)
        if rate > best_rate:
            best, best_rate = state, rate
        if abs(rate - prev) < epsilon:
            reason = "converged"
            break
        prev = rate
    return best, trace, reason


def maximize_sum_rate(scenario: Scenario, channels: ChannelRealization, scheme, seed) -> SolveResult:
    """Run one scheme on one realization; deterministic in ``seed``.

    ``seed`` feeds independent streams for the initial modes, the initial
    phases, the coalition dynamics and the RP redraws, so schemes that skip a
    block still start from the same draws as the full stack.
    """
    scheme = SchemeId.parse(scheme) if isinstance(scheme, str) else SchemeId(scheme)
    if scheme is SchemeId.NonRIS:
        channels = channels.without_reflections()
    system = System(scenario, channels)
    rngs = _streams(seed)
    state = initial_state(system, scheme, rngs)
    initial_rate = -_rank(system, state)[1]
    best, trace, reason = run_blocks(system, state, scheme, rngs)
    key = _rank(system, best)
    return SolveResult(
        scheme=scheme,
        partition=best.partition,
        power=np.asarray(best.power, dtype=float),
        phases=best.phases,
        sum_rate=-key[1],
        iterations=len(trace),
        initial_rate=initial_rate,
        trace=trace,
        feasible=key[0] == 0,
        reason=reason,
        violations=key[0],
    )
