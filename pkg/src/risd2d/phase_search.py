"""Element-wise exhaustive search over discrete RIS phases.

Panels are visited in ascending order and, within a panel, elements by
``lz`` then ``ly``. Each element tries every codeword with all other elements
frozen and keeps the best one that creates no new SINR violation. Sweeps
repeat until one full pass changes nothing, so the result is 1-opt.
"""

from __future__ import annotations

import numpy as np

from .rate import LinkGains, State, System, no_new_violations, sinr_batch

# relative margin a challenger must beat the incumbent by
TIE_RTOL = 1e-12


class PhaseEvaluator:
    """Complex effective gains for one (partition, power) with O(1) element updates.

    Keeps ``Gc``/``Gm`` (the direct plus reflected sums) and patches the
    columns served by a panel when one of its elements changes.
    """

    def __init__(self, system: System, state: State):
        self.system = system
        self.partition = state.partition
        self.power = np.asarray(state.power, dtype=float)
        self.labels = state.partition.labels()
        self.noise = system.noise(self.labels)
        self.index = np.array(state.phases.index, copy=True)
        self.phases = state.phases
        self.Gc, self.Gm = system.effective_gains(state.phases)
        self.is_mm = self.labels == system.C
        self.weight = np.where(self.is_mm, system.outage_weight, 1.0) * system.bandwidth(self.labels)
        self.same = self.labels[:, None] == self.labels[None, :]

    def served(self, u: int) -> np.ndarray:
        return np.flatnonzero(self.system.assist == u)

    def scope(self, cols: np.ndarray) -> np.ndarray:
        """Links whose SINR depends on the transmitters in ``cols``."""
        return np.flatnonzero(np.any(self.same[:, cols], axis=1))

    def candidate_gains(self, u: int, k: int):
        """``(cols, Gc_cols, Gm_cols)`` for every codeword at element ``k`` of panel ``u``.

        Arrays have shape ``(2**e, L, len(cols))``.
        """
        s = self.system
        cols = self.served(u)
        cb = s.codebook
        q = np.exp(1j * cb)
        dq = q - q[self.index.reshape(s.M, -1)[u, k]]
        Gc = self.Gc[:, cols][None] + s.alpha_c * s.refl_c[:, cols, k][None] * dq[:, None, None]
        Gm = self.Gm[:, cols][None] + s.alpha_m * s.refl_m[:, cols, k][None] * dq[:, None, None]
        return cols, Gc, Gm

    def _sinr(self, Gc, Gm) -> np.ndarray:
        return sinr_batch(np.abs(Gc) ** 2, np.abs(Gm) ** 2, self.labels, self.power, self.noise, self.system.C)

    def sinr(self) -> np.ndarray:
        return self._sinr(self.Gc, self.Gm)

    def rates(self, sinr, links=slice(None)) -> np.ndarray:
        return self.weight[links] * np.log2(1.0 + sinr[..., links])

    def evaluate_element(self, u: int, k: int):
        """SINR of every link (rows) for each codeword (batch) at one element."""
        cols, gc, gm = self.candidate_gains(u, k)
        n = gc.shape[0]
        Gc = np.broadcast_to(self.Gc, (n,) + self.Gc.shape).copy()
        Gm = np.broadcast_to(self.Gm, (n,) + self.Gm.shape).copy()
        Gc[:, :, cols] = gc
        Gm[:, :, cols] = gm
        return cols, Gc, Gm, self._sinr(Gc, Gm)

    def set_element(self, u: int, k: int, code: int, Gc_new, Gm_new) -> None:
        self.index.reshape(self.system.M, -1)[u, k] = code
        self.Gc, self.Gm = Gc_new, Gm_new

    def config(self):
        return self.phases.with_index(self.index)


def _choose(objective: np.ndarray, admissible: np.ndarray, incumbent: int) -> int:
    """Best admissible codeword; the incumbent wins unless strictly beaten."""
    masked = np.where(admissible, objective, -np.inf)
    best = int(np.argmax(masked))
    base = objective[incumbent]
    if masked[best] > base + TIE_RTOL * abs(base):
        return best
    return incumbent


def optimize_phases(state: State, system: System, max_sweeps: int | None = None, stats: dict | None = None):
    """Coordinate-wise exhaustive phase search; returns the new PhaseConfig.

    The objective for an element is the rate of the links whose SINR depends
    on that element's panel, which ranks codewords exactly like the system sum
    rate. With zero reflected channels every codeword ties and nothing moves.
    """
    max_sweeps = system.params.max_phase_sweeps if max_sweeps is None else max_sweeps
    ev = PhaseEvaluator(system, state)
    M, K = system.M, system.N * system.N
    sweeps = changes = 0
    for _ in range(max_sweeps):
        sweeps += 1
        changed = 0
        ev.Gc, ev.Gm = system.effective_gains(ev.config())  # drop accumulated rounding
        for u in range(M):
            cols = ev.served(u)
            if cols.size == 0:
                continue
            scope = ev.scope(cols)
            for k in range(K):
                incumbent = int(ev.index.reshape(M, -1)[u, k])
                _, Gc, Gm, sinr = ev.evaluate_element(u, k)
                ok = system.sinr_ok(sinr)
                admissible = np.all(ok | ~ok[incumbent], axis=1)
                objective = ev.rates(sinr, scope).sum(axis=1)
                best = _choose(objective, admissible, incumbent)
                if best != incumbent:
                    ev.set_element(u, k, best, Gc[best], Gm[best])
                    changed += 1
        changes += changed
        if changed == 0:
            break
    if stats is not None:
        stats.update(sweeps=sweeps, changes=changes)
    return ev.config()


def improving_deviations(state: State, system: System) -> list[tuple[int, int, int]]:
    """Every single-element change ``(panel, element, codeword)`` that the search would accept."""
    ev = PhaseEvaluator(system, state)
    M, K = system.M, system.N * system.N
    out = []
    for u in range(M):
        cols = ev.served(u)
        if cols.size == 0:
            continue
        scope = ev.scope(cols)
        for k in range(K):
            incumbent = int(ev.index.reshape(M, -1)[u, k])
            _, _, _, sinr = ev.evaluate_element(u, k)
            ok = system.sinr_ok(sinr)
            objective = ev.rates(sinr, scope).sum(axis=1)
            for c in range(len(objective)):
                if c == incumbent or not no_new_violations(ok[c], ok[incumbent]):
                    continue
                base = objective[incumbent]
                if objective[c] > base + TIE_RTOL * abs(base):
                    out.append((u, k, c))
    return out


def is_one_opt(state: State, system: System) -> bool:
    return not improving_deviations(state, system)


def phase_objective(state: State, system: System, panel: int | None = None) -> float:
    """Sum rate over links touched by ``panel`` (all links when ``None``)."""
    gains: LinkGains = system.gains(state.phases)
    rates = gains.link_rates(state.partition, state.power)
    if panel is None:
        return float(rates.sum())
    ev = PhaseEvaluator(system, state)
    cols = ev.served(panel)
    return float(rates[ev.scope(cols)].sum()) if cols.size else 0.0
