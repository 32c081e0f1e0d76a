"""Simulation parameters and unit conversions.

Every formula downstream consumes linear quantities (W, Hz, ratios);
dB/dBm values only appear in :class:`SimParams` and are converted here.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watt(x_dbm):
    return db_to_linear(x_dbm) * 1e-3


def watt_to_dbm(x_w):
    return linear_to_db(x_w) + 30.0


def noise_power(density_dbm_per_mhz: float, bandwidth_hz: float) -> float:
    """Noise power in W for a density given per MHz over ``bandwidth_hz``."""
    return float(dbm_to_watt(density_dbm_per_mhz) * bandwidth_hz / 1e6)


@dataclass(frozen=True)
class SimParams:
    """System parameters. Defaults are the reference indoor setup."""

    W_m: float = 2160e6
    W_c: float = 22e6
    N0m: float = -134.0  # dBm/MHz
    N0c: float = -174.0  # dBm/MHz
    P_m: float = 23.0  # dBm
    P_c: float = 20.0  # dBm
    n: float = 2.0
    alpha_los: float = 2.5
    alpha_nlos: float = 3.6
    beta0: float = -61.3849  # dB
    G0: float = 0.5  # dBi
    Gb: float = 14.0  # dBi
    gamma_min: float = 5.0  # dB
    r_max: float = 10.0 * math.sqrt(2.0)
    beta1: float = 0.01
    rice_beta: float = 4.0
    nakagami_m: float = 3.0
    nakagami_omega: float = 1.0 / 3.0
    alpha_refl_c: float = 1.0
    alpha_refl_m: float = 0.8
    N: int = 4
    e: int = 3
    M: int = 8
    epsilon_outer: float = 1e3
    epsilon_inner: float = 1e3

    # geometry
    area: tuple[float, float] = (100.0, 200.0)
    bs_position: tuple[float, float, float] = (50.0, 100.0, 0.0)
    element_spacing: float = 0.005

    # model switches
    codebook: str = "paper"  # "paper": 2*pi*m/(2^e-1); "uniform": 2*pi*m/2^e
    double_alpha: bool = False  # apply alpha_refl_c inside the cellular reflected channel as well
    dual_update: str = "paper"  # "paper" | "ascent"
    initial_modes: str = "mmwave"  # "mmwave" | "random": starting partition of the outer loop

    # iteration guards
    max_inner: int = 500
    max_outer: int = 50
    max_phase_sweeps: int = 20
    coalition_patience: int = 10  # failures per D2D pair before the stability check

    def __post_init__(self):
        for name in ("W_m", "W_c", "n", "alpha_los", "alpha_nlos", "r_max", "nakagami_m", "nakagami_omega"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("alpha_refl_c", "alpha_refl_m"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.e < 1:
            raise ValueError("quantization bits e must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.M != 8:
            raise ValueError("only the fixed two-row layout with M = 8 panels is supported")
        if self.beta1 < 0 or self.rice_beta < 0:
            raise ValueError("beta1 and rice_beta must be non-negative")
        if self.codebook not in ("paper", "uniform"):
            raise ValueError(f"unknown codebook {self.codebook!r}")
        if self.dual_update not in ("paper", "ascent"):
            raise ValueError(f"unknown dual_update {self.dual_update!r}")
        if self.initial_modes not in ("mmwave", "random"):
            raise ValueError(f"unknown initial_modes {self.initial_modes!r}")

    # linear views
    @property
    def sigma2_c(self) -> float:
        return noise_power(self.N0c, self.W_c)

    @property
    def sigma2_m(self) -> float:
        return noise_power(self.N0m, self.W_m)

    @property
    def p_max_c(self) -> float:
        return float(dbm_to_watt(self.P_c))

    @property
    def p_max_m(self) -> float:
        return float(dbm_to_watt(self.P_m))

    @property
    def gamma_min_linear(self) -> float:
        return float(db_to_linear(self.gamma_min))

    @property
    def beta0_linear(self) -> float:
        return float(db_to_linear(self.beta0))

    @property
    def g0_linear(self) -> float:
        return float(db_to_linear(self.G0))

    @property
    def gb_linear(self) -> float:
        return float(db_to_linear(self.Gb))

    def replace(self, **changes) -> "SimParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SimParams":
        """Build from a (possibly partial) mapping; missing fields keep defaults."""
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown parameter(s): {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("area", "bs_position"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "SimParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
