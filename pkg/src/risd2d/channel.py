"""Stochastic channel draws for both bands, direct and RIS-reflected.

Cellular band: Rayleigh with power-law loss ``l**-n`` and antenna gains.
mm-wave direct: Nakagami-m amplitude with uniform phase and loss ``beta0 * d**-alpha``.
mm-wave reflected: per-element Rician mix of a LoS and an NLoS term using the
far-field product of the two legs.
Cellular reflected: one Rayleigh factor per (tx, rx, panel) scaling a
deterministic per-element loss over the summed legs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .params import SimParams
from .scenario import Node, RisPanel, Scenario, reflect_path_lengths


def crandn(rng: np.random.Generator, size=None) -> np.ndarray:
    """Circularly-symmetric complex normal with unit variance."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def antenna_gain(node: Node, params: SimParams) -> float:
    return params.gb_linear if node.role == "bs" else params.g0_linear


def _distance(a: Node, b: Node) -> float:
    return float(np.linalg.norm(np.subtract(a.position, b.position)))


def _rice_weights(rice_beta: float) -> tuple[float, float]:
    if np.isinf(rice_beta):
        return 1.0, 0.0
    return np.sqrt(rice_beta / (1.0 + rice_beta)), np.sqrt(1.0 / (1.0 + rice_beta))


def nakagami(rng: np.random.Generator, m: float, omega: float, size=None) -> np.ndarray:
    """Complex coefficient with Nakagami-m amplitude and uniform phase."""
    power = rng.gamma(m, omega / m, size)
    phase = rng.uniform(0.0, 2.0 * np.pi, size)
    return np.sqrt(power) * np.exp(1j * phase)


# -- single-link samplers ----------------------------------------------------

def sample_direct_cellular(tx: Node, rx: Node, params: SimParams, rng: np.random.Generator, size=None):
    l = _distance(tx, rx)
    if l == 0.0:
        raise ValueError("degenerate geometry: cellular direct link of zero length")
    scale = np.sqrt(antenna_gain(tx, params) * antenna_gain(rx, params) * l ** (-params.n))
    return crandn(rng, size) * scale


def sample_direct_mmwave(tx: Node, rx: Node, params: SimParams, rng: np.random.Generator, size=None):
    d = _distance(tx, rx)
    if d == 0.0:
        raise ValueError("degenerate geometry: mm-wave direct link of zero length")
    scale = np.sqrt(params.beta0_linear * d ** (-params.alpha_los))
    return nakagami(rng, params.nakagami_m, params.nakagami_omega, size) * scale


def _refl_mmwave(d_in, d_out, params: SimParams, rng, rice_beta: float, size=None):
    prod = d_in * d_out
    if np.any(prod == 0.0):
        raise ValueError("degenerate geometry: zero-length reflection leg")
    shape = np.shape(prod) if size is None else tuple(np.atleast_1d(size)) + np.shape(prod)
    w_los, w_nlos = _rice_weights(rice_beta)
    los = np.sqrt(params.beta0_linear * prod ** (-params.alpha_los)) * np.exp(
        -1j * rng.uniform(0.0, 2.0 * np.pi, shape)
    )
    nlos = np.sqrt(params.beta0_linear * prod ** (-params.alpha_nlos)) * crandn(rng, shape)
    return w_los * los + w_nlos * nlos


def sample_reflected_mmwave(
    tx: Node, rx: Node, panel: RisPanel, params: SimParams, rng: np.random.Generator, size=None, rice_beta=None
):
    """(N, N) grid of reflected mm-wave coefficients, or ``size + (N, N)``."""
    legs = reflect_path_lengths(tx.position, rx.position, panel)
    beta = params.rice_beta if rice_beta is None else rice_beta
    return _refl_mmwave(legs[..., 0], legs[..., 1], params, rng, beta, size)


def sample_reflected_cellular(
    tx: Node, rx: Node, panel: RisPanel, params: SimParams, rng: np.random.Generator, size=None, alpha=None
):
    """(N, N) grid of reflected cellular coefficients sharing one Rayleigh factor.

    ``alpha`` is the reflection coefficient folded into the amplitude; it
    defaults to ``params.alpha_refl_c``.
    """
    legs = reflect_path_lengths(tx.position, rx.position, panel)
    total = legs[..., 0] + legs[..., 1]
    if np.any(total == 0.0):
        raise ValueError("degenerate geometry: zero-length reflected path")
    a = params.alpha_refl_c if alpha is None else alpha
    amp = np.sqrt(a * antenna_gain(tx, params) * antenna_gain(rx, params) * total ** (-params.n))
    h0 = crandn(rng, size)
    return np.multiply.outer(h0, amp) if size is not None else h0 * amp


def outage_probability(distance, beta1: float):
    distance = np.asarray(distance, dtype=float)
    if np.any(distance < 0):
        raise ValueError("distance must be non-negative")
    out = 1.0 - np.exp(-beta1 * distance)
    return float(out) if out.ndim == 0 else out


# -- full realization ----------------------------------------------------------

@dataclass(frozen=True)
class ChannelRealization:
    """One draw of every coefficient in the system.

    Receivers are indexed ``[d2d rx 0..D-1, BS]`` and transmitters
    ``[d2d tx 0..D-1, cellular user 0..C-1]`` so link ``i`` transmits from
    index ``i``. mm-wave tensors only cover D2D endpoints.
    """

    g_direct: np.ndarray  # (D+1, D+C)
    h_direct: np.ndarray  # (D, D)
    g_refl: np.ndarray  # (D+1, D+C, M, N, N)
    h_refl: np.ndarray  # (D, D, M, N, N)
    sigma2_c: float
    sigma2_m: float
    p_out: np.ndarray  # (D+C,), zero for cellular uplinks

    def without_reflections(self) -> "ChannelRealization":
        return replace(self, g_refl=np.zeros_like(self.g_refl), h_refl=np.zeros_like(self.h_refl))

    def save(self, path: str | Path) -> None:
        np.savez(
            path,
            g_direct=self.g_direct,
            h_direct=self.h_direct,
            g_refl=self.g_refl,
            h_refl=self.h_refl,
            sigma2=np.array([self.sigma2_c, self.sigma2_m]),
            p_out=self.p_out,
        )

    @classmethod
    def load(cls, path: str | Path) -> "ChannelRealization":
        with np.load(path) as z:
            return cls(
                g_direct=z["g_direct"],
                h_direct=z["h_direct"],
                g_refl=z["g_refl"],
                h_refl=z["h_refl"],
                sigma2_c=float(z["sigma2"][0]),
                sigma2_m=float(z["sigma2"][1]),
                p_out=z["p_out"],
            )


def _pairwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)


def _node_keys(D: int, C: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Identity of every receiver and transmitter that does not depend on D or C."""
    rx = [(0, d) for d in range(D)] + [(2, 0)]
    tx = [(0, d) for d in range(D)] + [(1, c) for c in range(C)]
    return rx, tx


def draw_channels(scenario: Scenario, seed) -> ChannelRealization:
    """Draw a full realization; ``seed`` may be an int or a SeedSequence.

    Every (receiver, transmitter) pair draws from its own stream keyed by
    the two nodes' identities, in a fixed order (cellular direct, mm-wave
    direct, cellular reflected, mm-wave reflected). Adding pairs or cellular
    users therefore leaves the coefficients of the existing ones unchanged.
    """
    p = scenario.params
    D, C = scenario.D, scenario.C
    M = p.M
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)

    tx = scenario.tx_positions()
    rx = scenario.rx_positions()
    elements = np.stack([panel.element_positions for panel in scenario.ris_panels])  # (M, N, N, 3)

    g_tx = np.full(D + C, p.g0_linear)
    g_rx = np.full(D + 1, p.g0_linear)
    g_rx[D] = p.gb_linear
    gain = g_rx[:, None] * g_tx[None, :]

    l = _pairwise(rx, tx)
    if np.any(l == 0.0):
        raise ValueError("degenerate geometry: coincident transmitter and receiver")
    d_tx = np.linalg.norm(elements[None] - tx[:, None, None, None, :], axis=-1)  # (T, M, N, N)
    d_rx = np.linalg.norm(elements[None] - rx[:, None, None, None, :], axis=-1)  # (R, M, N, N)
    prod = d_rx[:D, None] * d_tx[None, :D]  # (D, D, M, N, N)

    z_direct = np.empty((D + 1, D + C), complex)
    h_fading = np.empty((D, D), complex)
    h0 = np.empty((D + 1, D + C, M), complex)
    h_refl = np.empty(prod.shape, complex)
    rx_keys, tx_keys = _node_keys(D, C)
    for i, rk in enumerate(rx_keys):
        for j, tk in enumerate(tx_keys):
            rng = np.random.default_rng(np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + rk + tk))
            z_direct[i, j] = crandn(rng)
            mm = i < D and j < D
            if mm:
                h_fading[i, j] = nakagami(rng, p.nakagami_m, p.nakagami_omega)
            h0[i, j] = crandn(rng, M)
            if mm:
                h_refl[i, j] = _refl_mmwave(prod[i, j], 1.0, p, rng, p.rice_beta)

    g_direct = z_direct * np.sqrt(gain * l ** (-p.n))
    h_direct = h_fading * np.sqrt(p.beta0_linear * l[:D, :D] ** (-p.alpha_los))

    total = d_rx[:, None] + d_tx[None, :]  # (R, T, M, N, N)
    alpha_c = p.alpha_refl_c if p.double_alpha else 1.0
    amp = np.sqrt(alpha_c * gain[..., None, None, None] * total ** (-p.n))
    g_refl = h0[..., None, None] * amp

    p_out = np.zeros(D + C)
    p_out[:D] = outage_probability(scenario.d2d_distances(), p.beta1)
    return ChannelRealization(g_direct, h_direct, g_refl, h_refl, p.sigma2_c, p.sigma2_m, p_out)
