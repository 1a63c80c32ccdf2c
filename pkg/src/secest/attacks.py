"""Seeded sensor-attack generators for the MITM and GPS-spoofing scenarios.

Each generator owns its RNG stream, so the attack sequence is a pure function
of the seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class AttackKind(str, enum.Enum):
    MITM_RAMP = "MitmRamp"
    GPS_SINUSOID = "GpsSinusoid"
    NONE = "None"


@dataclass
class AttackModel:
    """Per-step attack ``e(k)``: one structured channel plus one random Gaussian channel.

    ``shape`` selects the MITM ramp profile ("linear" or "quadratic").
    """

    kind: AttackKind = AttackKind.MITM_RAMP
    slope: float = 0.05
    amp: float = 1.0
    period: float = 50.0
    sigma_a: float = 1.0
    seed: int = 0
    target: int = 0
    shape: str = "linear"
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.kind = AttackKind(self.kind)
        self.rng = np.random.default_rng(self.seed)

    def __call__(self, k, p):
        if self.kind is AttackKind.MITM_RAMP:
            return mitm_attack(self, k, p)
        if self.kind is AttackKind.GPS_SINUSOID:
            return gps_spoof_attack(self, k, p)
        return np.zeros(p)

    def sequence(self, K, p):
        """``(K, p)`` array of attacks for steps 0..K-1 (advances the RNG)."""
        return np.array([self(k, p) for k in range(K)]).reshape(K, p)


def mitm_attack(model, k, p):
    """Increasing ramp on the target channel plus Gaussian noise on a random other channel."""
    if p < 2:
        raise ValueError("MITM attack needs at least two channels")
    e = np.zeros(p)
    if model.shape == "quadratic":
        e[model.target] = model.slope * (k + 1) ** 2 / 10.0
    else:
        e[model.target] = model.slope * (k + 1)
    j = int(model.rng.integers(0, p - 1))
    j += j >= model.target
    e[j] = model.rng.normal(0.0, model.sigma_a) if model.sigma_a > 0 else 0.0
    return e


def gps_spoof_attack(model, k, p):
    """Sinusoid on channel 0 plus Gaussian noise on a random position channel in {0, 1, 2}."""
    if p < 3:
        raise ValueError("GPS spoofing needs the three position channels")
    e = np.zeros(p)
    e[model.target] = model.amp * np.sin(2.0 * np.pi * k / model.period)
    j = int(model.rng.integers(0, 3))
    e[j] += model.rng.normal(0.0, model.sigma_a) if model.sigma_a > 0 else 0.0
    return e
