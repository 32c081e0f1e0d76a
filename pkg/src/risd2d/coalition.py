"""Switch-operation coalition formation over D2D operating modes.

A D2D pair may leave its coalition for another one when the joint value of
the two coalitions strictly increases and no link that currently meets the
SINR floor is pushed below it. Powers and phases stay fixed, except that a
pair entering a new band transmits at that band's power cap.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .rate import LinkGains, State, System, no_new_violations


@dataclass
class SwitchEvent:
    step: int
    pair: int
    src: int
    dst: int
    total_utility: float


@dataclass
class CoalitionTrace:
    initial_utility: float = 0.0
    events: list[SwitchEvent] = field(default_factory=list)
    attempts: int = 0

    def write_jsonl(self, fh: IO[str]) -> None:
        for ev in self.events:
            fh.write(json.dumps(ev.__dict__) + "\n")


def moved_power(system: System, power: np.ndarray, d: int, to: int) -> np.ndarray:
    out = np.array(power, dtype=float, copy=True)
    p = system.params
    out[d] = p.p_max_m if to == system.C else p.p_max_c
    return out


def switch_gain(state: State, d: int, dst: int, system: System, gains: LinkGains | None = None):
    """Change of ``R(src) + R(dst)`` if pair ``d`` moves to ``dst``, plus admissibility.

    Returns ``(delta, admissible, new_state)``.
    """
    gains = system.gains(state.phases) if gains is None else gains
    part = state.partition
    src = int(part.mode[d])
    new_part = part.switch(d, dst)
    new_power = moved_power(system, state.power, d, dst)

    old_sinr = gains.sinr(part, state.power)
    new_sinr = gains.sinr(new_part, new_power)
    old_u = gains.link_rates(part, state.power, old_sinr)
    new_u = gains.link_rates(new_part, new_power, new_sinr)

    old_ids = np.union1d(part.link_ids(src), part.link_ids(dst))
    new_ids = np.union1d(new_part.link_ids(src), new_part.link_ids(dst))
    before = float(np.sum(old_u[old_ids]))
    after = float(np.sum(new_u[new_ids]))
    ok = no_new_violations(system.sinr_ok(new_sinr), system.sinr_ok(old_sinr))
    return after - before, ok, State(new_part, new_power, state.phases)


def prefers_switch(d: int, src: int, dst: int, state: State, system: System, gains: LinkGains | None = None) -> bool:
    """Whether pair ``d`` prefers coalition ``dst`` over its current ``src``.

    Ties are not preferred: the pair stays where it is.
    """
    if src == dst:
        raise ValueError("source and target coalition must differ")
    if int(state.partition.mode[d]) != src:
        raise ValueError(f"pair {d} is not in coalition {src}")
    delta, ok, _ = switch_gain(state, d, dst, system, gains)
    return ok and delta > 0.0


def preferred_switches(state: State, system: System, gains: LinkGains | None = None) -> list[tuple[int, int]]:
    """Every single-pair deviation that would be accepted, as ``(pair, target)``."""
    gains = system.gains(state.phases) if gains is None else gains
    out = []
    for d in range(system.D):
        src = int(state.partition.mode[d])
        for dst in range(system.C + 1):
            if dst != src and prefers_switch(d, src, dst, state, system, gains):
                out.append((d, dst))
    return out


def is_nash_stable(state: State, system: System, gains: LinkGains | None = None) -> bool:
    return not preferred_switches(state, system, gains)


def form_coalitions(state: State, system: System, rng: np.random.Generator, trace: CoalitionTrace | None = None) -> State:
    """Run switch operations until no pair wants to move.

    Pairs are visited in ascending order, each proposing a uniformly drawn
    other coalition. After ``patience * D`` consecutive rejections an
    exhaustive check confirms stability; any preferred switch it finds is
    applied and the random phase resumes.
    """
    D, C = system.D, system.C
    if C == 0:
        return state
    gains = system.gains(state.phases)
    limit = system.params.coalition_patience * D
    if trace is not None:
        trace.initial_utility = gains.sum_rate(state.partition, state.power)

    def record(d, src, dst, new_state):
        if trace is not None:
            total = gains.sum_rate(new_state.partition, new_state.power)
            trace.events.append(SwitchEvent(len(trace.events), d, src, dst, total))
        return new_state

    num = 0
    k = 0
    while True:
        d = k % D
        k += 1
        src = int(state.partition.mode[d])
        choices = [c for c in range(C + 1) if c != src]
        dst = int(choices[rng.integers(len(choices))])
        delta, ok, new_state = switch_gain(state, d, dst, system, gains)
        if trace is not None:
            trace.attempts += 1
        if ok and delta > 0.0:
            state = record(d, src, dst, new_state)
            num = 0
            continue
        num += 1
        if num >= limit:
            pending = preferred_switches(state, system, gains)
            if not pending:
                return state
            d, dst = pending[0]
            src = int(state.partition.mode[d])
            _, _, new_state = switch_gain(state, d, dst, system, gains)
            state = record(d, src, dst, new_state)
            num = 0
