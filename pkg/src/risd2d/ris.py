"""Discrete RIS phase configuration and path composition."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


def phase_codebook(e: int, kind: str = "paper") -> np.ndarray:
    """Selectable phases for ``e`` quantization bits, ascending.

    ``"paper"`` spaces ``2**e`` values over ``[0, 2*pi]`` inclusive, so the
    first and last codewords coincide modulo ``2*pi`` (and ``e = 1`` gives two
    equivalent phases). ``"uniform"`` uses ``2*pi*m / 2**e`` instead.
    """
    if e < 1:
        raise ValueError("need at least one quantization bit")
    m = np.arange(2**e)
    if kind == "paper":
        return 2.0 * np.pi * m / (2**e - 1)
    if kind == "uniform":
        return 2.0 * np.pi * m / 2**e
    raise ValueError(f"unknown codebook {kind!r}")


@dataclass(frozen=True)
class PhaseConfig:
    """Integer codebook indices per panel element plus the link -> panel map."""

    e: int
    index: np.ndarray  # (M, N, N) ints
    assist: np.ndarray  # (L,) panel per link
    codebook: str = "paper"

    def __post_init__(self):
        index = np.asarray(self.index, dtype=np.int64)
        if index.ndim != 3:
            raise ValueError("index grid must be (M, N, N)")
        if index.min(initial=0) < 0 or index.max(initial=0) >= 2**self.e:
            raise ValueError("phase index outside the codebook")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "assist", np.asarray(self.assist, dtype=np.int64))

    @property
    def angles(self) -> np.ndarray:
        return phase_codebook(self.e, self.codebook)[self.index]

    def response(self) -> np.ndarray:
        """Unit-modulus coefficients ``exp(j*theta)``, shape (M, N, N)."""
        return np.exp(1j * self.angles)

    def with_index(self, index: np.ndarray) -> "PhaseConfig":
        return PhaseConfig(self.e, np.array(index, copy=True), self.assist, self.codebook)

    @classmethod
    def random(cls, rng: np.random.Generator, e: int, shape, assist, codebook: str = "paper") -> "PhaseConfig":
        return cls(e, rng.integers(0, 2**e, size=shape), assist, codebook)

    def to_dict(self) -> dict:
        return {
            "e": self.e,
            "codebook": self.codebook,
            "assist": self.assist.tolist(),
            "index": self.index.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseConfig":
        return cls(data["e"], np.array(data["index"]), np.array(data["assist"]), data.get("codebook", "paper"))

    def __eq__(self, other):
        if not isinstance(other, PhaseConfig):
            return NotImplemented
        return (
            self.e == other.e
            and self.codebook == other.codebook
            and np.array_equal(self.index, other.index)
            and np.array_equal(self.assist, other.assist)
        )

    __hash__ = None


def effective_gain(direct, reflected, phase_index, alpha_refl: float, codebook) -> complex:
    """Direct path plus the phase-shifted sum over one panel's elements.

    ``codebook`` is the array of selectable angles, ``phase_index`` an
    integer grid congruent with ``reflected``.
    """
    reflected = np.asarray(reflected)
    theta = np.asarray(codebook)[np.asarray(phase_index)]
    if theta.shape != reflected.shape:
        raise ValueError("phase grid and reflected grid differ in shape")
    return complex(direct + alpha_refl * np.sum(reflected * np.exp(1j * theta)))
