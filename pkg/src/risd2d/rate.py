"""SINR, Shannon rates, coalition utilities and the system sum rate.

Links are numbered ``0..D-1`` for D2D pairs and ``D..D+C-1`` for cellular
uplinks. A :class:`Partition` labels each D2D pair with the coalition it
belongs to: ``0..C-1`` shares cellular user ``c``'s uplink band, ``C`` is the
common mm-wave coalition. Cellular user ``c`` carries label ``c``. Two links
interfere exactly when they carry the same label.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelRealization
from .params import SimParams
from .ris import PhaseConfig, phase_codebook
from .scenario import Link, Scenario, assist_panels

# tolerance on the SINR floor, in log10 units
SINR_SLACK_LG = 1e-9


@dataclass(frozen=True)
class Partition:
    mode: np.ndarray  # (D,) coalition label per D2D pair
    C: int

    def __post_init__(self):
        mode = np.asarray(self.mode, dtype=np.int64)
        if mode.ndim != 1 or mode.size == 0:
            raise ValueError("mode must be a non-empty 1-D array")
        if mode.min() < 0 or mode.max() > self.C:
            raise ValueError("coalition label out of range")
        mode = mode.copy()
        mode.setflags(write=False)
        object.__setattr__(self, "mode", mode)

    @property
    def D(self) -> int:
        return self.mode.size

    @property
    def mmwave(self) -> int:
        return self.C

    @classmethod
    def all_mmwave(cls, D: int, C: int) -> "Partition":
        return cls(np.full(D, C), C)

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.mode == k)

    def owner(self, k: int):
        return None if k == self.C else k

    def coalitions(self) -> list[tuple[int, ...]]:
        return [tuple(int(d) for d in self.members(k)) for k in range(self.C + 1)]

    def labels(self) -> np.ndarray:
        return np.concatenate([self.mode, np.arange(self.C)])

    def link_ids(self, k: int) -> np.ndarray:
        """Links whose utility forms coalition ``k``'s value (members plus owner)."""
        ids = self.members(k)
        if k < self.C:
            ids = np.append(ids, self.D + k)
        return ids

    def assignment_matrix(self) -> np.ndarray:
        """Binary ``X[c, d]``; column sums are at most one."""
        X = np.zeros((self.C, self.D), dtype=int)
        for d, k in enumerate(self.mode):
            if k < self.C:
                X[k, d] = 1
        return X

    def switch(self, d: int, to: int) -> "Partition":
        mode = self.mode.copy()
        mode[d] = to
        return Partition(mode, self.C)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.C == other.C and np.array_equal(self.mode, other.mode)

    __hash__ = None


@dataclass(frozen=True)
class State:
    partition: Partition
    power: np.ndarray  # (D+C,) W
    phases: PhaseConfig

    def with_(self, **kw) -> "State":
        return replace(self, **kw)


class System:
    """Link-level view of one scenario and channel realization.

    Precomputes, for every (receiving link i, transmitting link j), the direct
    coefficient and the per-element reflected coefficients through the panel
    serving link j, in both bands.
    """

    def __init__(self, scenario: Scenario, channels: ChannelRealization, assist=None):
        self.scenario = scenario
        self.channels = channels
        self.params: SimParams = scenario.params
        p = self.params
        self.D, self.C = scenario.D, scenario.C
        self.L = self.D + self.C
        self.M, self.N = p.M, p.N
        self.assist = assist_panels(scenario) if assist is None else np.asarray(assist, dtype=int)
        self.codebook = phase_codebook(p.e, p.codebook)
        self.rx_index = scenario.link_rx_index()

        L, D, K = self.L, self.D, self.N * self.N
        cols = np.arange(L)
        self.direct_c = channels.g_direct[self.rx_index, :].copy()
        g = channels.g_refl.reshape(D + 1, L, self.M, K)
        self.refl_c = g[self.rx_index][:, cols, self.assist[cols], :]

        self.direct_m = np.zeros((L, L), complex)
        self.direct_m[:D, :D] = channels.h_direct
        self.refl_m = np.zeros((L, L, K), complex)
        h = channels.h_refl.reshape(D, D, self.M, K)
        self.refl_m[:D, :D] = h[:, np.arange(D), self.assist[:D], :]

        self.alpha_c = p.alpha_refl_c
        self.alpha_m = p.alpha_refl_m
        self.sigma2_c = channels.sigma2_c
        self.sigma2_m = channels.sigma2_m
        self.outage_weight = 1.0 - channels.p_out
        self.gamma = p.gamma_min_linear
        self.links: list[Link] = scenario.links

    # -- phases -----------------------------------------------------------------

    def element_response(self, phases: PhaseConfig) -> np.ndarray:
        """``exp(j*theta)`` of the serving panel of each transmitting link, (L, N*N)."""
        q = phases.response().reshape(self.M, -1)
        return q[self.assist]

    def effective_gains(self, phases: PhaseConfig) -> tuple[np.ndarray, np.ndarray]:
        qt = self.element_response(phases)
        Gc = self.direct_c + self.alpha_c * np.einsum("ijk,jk->ij", self.refl_c, qt)
        Gm = self.direct_m + self.alpha_m * np.einsum("ijk,jk->ij", self.refl_m, qt)
        return Gc, Gm

    def gains(self, phases: PhaseConfig) -> "LinkGains":
        Gc, Gm = self.effective_gains(phases)
        return LinkGains(self, np.abs(Gc) ** 2, np.abs(Gm) ** 2)

    # -- helpers ----------------------------------------------------------------

    def caps(self, partition: Partition) -> np.ndarray:
        """Per-link power limit: mm-wave cap for mm-wave pairs, cellular otherwise."""
        p = self.params
        cap = np.full(self.L, p.p_max_c)
        cap[: self.D][partition.mode == partition.C] = p.p_max_m
        return cap

    def bandwidth(self, labels: np.ndarray) -> np.ndarray:
        return np.where(labels == self.C, self.params.W_m, self.params.W_c)

    def noise(self, labels: np.ndarray) -> np.ndarray:
        return np.where(labels == self.C, self.sigma2_m, self.sigma2_c)

    def sinr_ok(self, sinr) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log10(sinr) >= np.log10(self.gamma) - SINR_SLACK_LG

    def interference_mask(self, labels: np.ndarray) -> np.ndarray:
        A = labels[:, None] == labels[None, :]
        np.fill_diagonal(A, False)
        return A


def sinr_batch(G2c, G2m, labels, power, sigma2, C: int) -> np.ndarray:
    """SINR of every link given link-level power gains (optionally batched).

    ``G2c``/``G2m`` have shape ``(..., L, L)``, row = receiving link,
    column = transmitting link; ``sigma2`` is the per-link noise power.
    """
    is_mm = labels == C
    G = np.where(is_mm[:, None], G2m, G2c)
    A = labels[:, None] == labels[None, :]
    np.fill_diagonal(A, False)
    signal = np.diagonal(G, axis1=-2, axis2=-1) * power
    interference = np.einsum("...ij,j->...i", G * A, power)
    return signal / (interference + sigma2)


class LinkGains:
    """Squared effective gains for a fixed phase configuration."""

    def __init__(self, system: System, G2c: np.ndarray, G2m: np.ndarray):
        self.system = system
        self.G2c = G2c
        self.G2m = G2m

    def sinr(self, partition: Partition, power) -> np.ndarray:
        s = self.system
        labels = partition.labels()
        return sinr_batch(self.G2c, self.G2m, labels, np.asarray(power, float), s.noise(labels), s.C)

    def link_rates(self, partition: Partition, power, sinr=None) -> np.ndarray:
        """Delivered rate per link in bit/s; mm-wave pairs are scaled by ``1 - P_out``."""
        s = self.system
        labels = partition.labels()
        if sinr is None:
            sinr = self.sinr(partition, power)
        w = np.where(labels == s.C, s.outage_weight, 1.0)
        return w * s.bandwidth(labels) * np.log2(1.0 + sinr)

    def sum_rate(self, partition: Partition, power) -> float:
        return float(np.sum(self.link_rates(partition, power)))

    def utilities(self, partition: Partition, power) -> np.ndarray:
        """Value of every coalition ``0..C``."""
        rates = self.link_rates(partition, power)
        return np.bincount(partition.labels(), weights=rates, minlength=self.system.C + 1)

    def coalition_utility(self, k: int, partition: Partition, power) -> float:
        return float(self.utilities(partition, power)[k])


# -- single-state convenience API ------------------------------------------------

def link_rate(sinr, params: SimParams, band: str = "cellular"):
    """Shannon rate ``W * log2(1 + sinr)`` for the given band."""
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr < 0):
        raise ValueError("SINR must be non-negative")
    W = {"cellular": params.W_c, "mmwave": params.W_m}[band]
    r = W * np.log2(1.0 + sinr)
    return float(r) if r.ndim == 0 else r


def compute_sinr(link: int, state: State, system: System) -> float:
    labels = state.partition.labels()
    if link < system.D and labels[link] > system.C:
        raise ValueError(f"D2D link {link} is not in any coalition")
    return float(system.gains(state.phases).sinr(state.partition, state.power)[link])


def system_sum_rate(state: State, system: System) -> float:
    return system.gains(state.phases).sum_rate(state.partition, state.power)


def coalition_utility(k: int, state: State, system: System) -> float:
    return system.gains(state.phases).coalition_utility(k, state.partition, state.power)


def is_feasible(state: State, system: System) -> bool:
    sinr = system.gains(state.phases).sinr(state.partition, state.power)
    return bool(np.all(system.sinr_ok(sinr)))


def no_new_violations(ok_after: np.ndarray, ok_before: np.ndarray) -> bool:
    """True when no link that met the SINR floor before misses it after."""
    return bool(np.all(ok_after | ~ok_before))
