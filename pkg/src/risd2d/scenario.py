"""Deployment geometry: BS, cellular users, D2D pairs and RIS panels."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .params import SimParams

ROLES = ("bs", "cellular-user", "d2d-tx", "d2d-rx")

# two rows of four panels, rows at x = 0 and x = 50, columns every 50 m from y = 25
PANEL_ROWS = (0.0, 50.0)
PANEL_Y0 = 25.0
PANEL_DY = 50.0
PANELS_PER_ROW = 4

MAX_PLACEMENT_TRIES = 10_000


@dataclass(frozen=True)
class Node:
    id: str
    position: tuple[float, float, float]
    role: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class RisPanel:
    id: int
    anchor: tuple[float, float, float]
    row: int
    element_positions: np.ndarray  # (N, N, 3), indexed [lz, ly]

    @property
    def n_side(self) -> int:
        return self.element_positions.shape[0]


@dataclass(frozen=True)
class Link:
    """A transmitter/receiver pair. D2D links come first, then cellular uplinks."""

    id: int
    kind: str  # "d2d" | "cellular-uplink"
    tx: str
    rx: str

    @property
    def is_d2d(self) -> bool:
        return self.kind == "d2d"


def make_panel(panel_id: int, anchor, n_side: int, spacing: float, row: int) -> RisPanel:
    lz, ly = np.meshgrid(np.arange(n_side), np.arange(n_side), indexing="ij")
    pos = np.empty((n_side, n_side, 3))
    pos[..., 0] = anchor[0]
    pos[..., 1] = anchor[1] + ly * spacing
    pos[..., 2] = anchor[2] + lz * spacing
    pos.setflags(write=False)
    return RisPanel(panel_id, tuple(float(a) for a in anchor), row, pos)


def panel_layout(params: SimParams) -> list[RisPanel]:
    panels = []
    for row, x in enumerate(PANEL_ROWS):
        for k in range(PANELS_PER_ROW):
            anchor = (x, PANEL_Y0 + k * PANEL_DY, 0.0)
            panels.append(make_panel(len(panels), anchor, params.N, params.element_spacing, row))
    return panels


@dataclass(frozen=True)
class Scenario:
    params: SimParams
    bs: Node
    cellular_users: tuple[Node, ...]
    d2d_pairs: tuple[tuple[Node, Node], ...]
    ris_panels: tuple[RisPanel, ...]

    @property
    def C(self) -> int:
        return len(self.cellular_users)

    @property
    def D(self) -> int:
        return len(self.d2d_pairs)

    @property
    def links(self) -> list[Link]:
        out = [Link(d, "d2d", tx.id, rx.id) for d, (tx, rx) in enumerate(self.d2d_pairs)]
        out += [Link(self.D + c, "cellular-uplink", cu.id, self.bs.id) for c, cu in enumerate(self.cellular_users)]
        return out

    # Channel indexing: transmitters are [d2d tx..., cellular users...] so the
    # transmitter index of link i is i; receivers are [d2d rx..., BS].
    def tx_positions(self) -> np.ndarray:
        pos = [tx.position for tx, _ in self.d2d_pairs] + [cu.position for cu in self.cellular_users]
        return np.asarray(pos, dtype=float).reshape(-1, 3)

    def rx_positions(self) -> np.ndarray:
        pos = [rx.position for _, rx in self.d2d_pairs] + [self.bs.position]
        return np.asarray(pos, dtype=float).reshape(-1, 3)

    def link_rx_index(self) -> np.ndarray:
        return np.concatenate([np.arange(self.D), np.full(self.C, self.D)]).astype(int)

    def d2d_distances(self) -> np.ndarray:
        tx = self.tx_positions()[: self.D]
        rx = self.rx_positions()[: self.D]
        return np.linalg.norm(tx - rx, axis=1)

    def to_dict(self) -> dict:
        def node(n: Node) -> dict:
            return {"id": n.id, "position": list(n.position), "role": n.role}

        return {
            "params": self.params.to_dict(),
            "bs": node(self.bs),
            "cellular_users": [node(n) for n in self.cellular_users],
            "d2d_pairs": [{"tx": node(t), "rx": node(r)} for t, r in self.d2d_pairs],
            "ris_panels": [{"id": p.id, "anchor": list(p.anchor), "row": p.row} for p in self.ris_panels],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        def node(d: dict) -> Node:
            return Node(d["id"], tuple(float(x) for x in d["position"]), d["role"])

        params = SimParams.from_dict(data["params"])
        return cls(
            params=params,
            bs=node(data["bs"]),
            cellular_users=tuple(node(n) for n in data["cellular_users"]),
            d2d_pairs=tuple((node(p["tx"]), node(p["rx"])) for p in data["d2d_pairs"]),
            ris_panels=tuple(panel_layout(params)),
        )


def _uniform_point(rng: np.random.Generator, area) -> tuple[float, float, float]:
    x, y = rng.uniform(0.0, area[0]), rng.uniform(0.0, area[1])
    return (float(x), float(y), 0.0)


def _receiver_near(rng: np.random.Generator, tx, r_max: float, area) -> tuple[float, float, float]:
    for _ in range(MAX_PLACEMENT_TRIES):
        r = r_max * np.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * np.pi)
        x, y = tx[0] + r * np.cos(phi), tx[1] + r * np.sin(phi)
        if 0.0 <= x <= area[0] and 0.0 <= y <= area[1]:
            return (float(x), float(y), 0.0)
    raise RuntimeError("could not place a D2D receiver inside the deployment area")


def generate_scenario(params: SimParams, C: int, D: int, seed) -> Scenario:
    """Random deployment of ``C`` cellular users and ``D`` D2D pairs.

    Users are uniform in the rectangle; each D2D receiver is uniform in the
    disc of radius ``r_max`` around its transmitter, redrawn until it lands
    inside the rectangle. Each user (or pair) draws from its own stream, so
    scenarios with more users extend those with fewer.
    """
    if C < 0 or D < 1:
        raise ValueError("need C >= 0 and D >= 1")
    if C + 2 * D > MAX_PLACEMENT_TRIES:
        raise ValueError(f"too many users to place (C={C}, D={D})")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)

    def stream(*key):
        return np.random.default_rng(np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + key))

    area = params.area
    bs = Node("bs", tuple(float(v) for v in params.bs_position), "bs")
    cus = tuple(Node(f"cu{c}", _uniform_point(stream(1, c), area), "cellular-user") for c in range(C))
    pairs = []
    for d in range(D):
        rng = stream(0, d)
        tx = _uniform_point(rng, area)
        rx = _receiver_near(rng, tx, params.r_max, area)
        pairs.append((Node(f"d{d}tx", tx, "d2d-tx"), Node(f"d{d}rx", rx, "d2d-rx")))
    return Scenario(params, bs, cus, tuple(pairs), tuple(panel_layout(params)))


def reflect_path_lengths(tx_pos: Sequence[float], rx_pos: Sequence[float], panel: RisPanel) -> np.ndarray:
    """Distances tx -> element and element -> rx for every element.

    Returns an array of shape ``(N, N, 2)``; ``[..., 0]`` is the incident leg
    and ``[..., 1]`` the reflected leg.
    """
    el = panel.element_positions
    d_in = np.linalg.norm(el - np.asarray(tx_pos, dtype=float), axis=-1)
    d_out = np.linalg.norm(el - np.asarray(rx_pos, dtype=float), axis=-1)
    return np.stack([d_in, d_out], axis=-1)


def nearest_panel(point, panels: Sequence[RisPanel]) -> int:
    anchors = np.array([p.anchor for p in panels])
    return int(np.argmin(np.linalg.norm(anchors - np.asarray(point, dtype=float), axis=1)))


def assist_panels(scenario: Scenario) -> np.ndarray:
    """Panel serving each link: the one nearest the midpoint of its tx-rx segment."""
    tx = scenario.tx_positions()
    rx = scenario.rx_positions()[scenario.link_rx_index()]
    mid = 0.5 * (tx + rx)
    return np.array([nearest_panel(m, scenario.ris_panels) for m in mid], dtype=int)
