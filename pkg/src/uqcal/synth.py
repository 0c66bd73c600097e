"""Perfectly calibrated synthetic predictions and controlled miscalibration.

Randomness comes from numpy's Philox4x64 counter-based generator keyed by a
64-bit seed. Uniforms are built from the top 53 bits of each raw 64-bit
output as ``(k + 0.5) * 2**-53`` (never 0 or 1), and Gaussian draws are
``standard_normal_quantile(u)``. Both steps are platform independent, so a
seed reproduces the same stream everywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import GaussianPredictionSet, standard_normal_quantile


class Scenario(enum.Enum):
    """Perturbations applied to calibrated predictions."""

    S1 = "S1-const-sigma"
    S2 = "S2-hetero-sigma"
    S3 = "S3-const-mean"
    S4 = "S4-hetero-both"

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        key = text.strip().upper()
        for s in cls:
            if key == s.name or key == s.value.upper():
                return s
        raise ValueError(f"unknown scenario {text!r}; expected one of s1, s2, s3, s4")


CONSTANT_FACTOR = 0.9
FACTOR_LOW, FACTOR_HIGH = 0.9, 1.1


@dataclass(frozen=True)
class CalibratedGenConfig:
    seed: int = 0
    epsilon_floor: float | None = None  # None means 1e-6 * target range

    def __post_init__(self):
        if self.epsilon_floor is not None and not self.epsilon_floor > 0.0:
            raise ValueError("epsilon_floor must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


class PhiloxStream:
    """Seeded uniform/normal source with a documented, portable transform."""

    def __init__(self, seed: int):
        self._bits = np.random.Philox(key=int(seed) & (2**64 - 1), counter=0)

    def uniform(self, n: int) -> np.ndarray:
        raw = self._bits.random_raw(n)
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        return standard_normal_quantile(self.uniform(n))


def generate_calibrated(y, cfg: CalibratedGenConfig | None = None) -> GaussianPredictionSet:
    """Draw predictions that are calibrated by construction.

    sigma = max(0.05 R + sin^2(2 pi y / R) + N(0, (0.05 R)^2), eps) and
    y_hat ~ N(y, sigma^2), where R is the range of ``y``.
    """
    cfg = cfg or CalibratedGenConfig()
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.size < 2:
        raise ValueError("need at least two targets")
    r = float(y.max() - y.min())
    if not r > 0.0:
        raise ValueError("targets have zero range; the generator is undefined")
    eps = 1e-6 * r if cfg.epsilon_floor is None else cfg.epsilon_floor

    stream = PhiloxStream(cfg.seed)
    sigma_epistemic = 0.05 * r + np.sin(2.0 * math.pi * y / r) ** 2
    sigma_aleatoric = 0.05 * r * stream.normal(y.size)
    sigma = np.maximum(sigma_epistemic + sigma_aleatoric, eps)
    y_hat = y + sigma * stream.normal(y.size)
    return GaussianPredictionSet(y, y_hat, sigma)


def linear_factors(n: int, start: float, stop: float) -> np.ndarray:
    return np.linspace(start, stop, n) if n > 1 else np.array([0.5 * (start + stop)])


def apply_scenario(preds: GaussianPredictionSet, scenario: Scenario) -> GaussianPredictionSet:
    """Return a perturbed copy; linear factors follow sample index order."""
    n = len(preds)
    y_hat, sigma = preds.y_hat, preds.sigma
    if scenario is Scenario.S1:
        sigma = CONSTANT_FACTOR * sigma
    elif scenario is Scenario.S2:
        sigma = linear_factors(n, FACTOR_LOW, FACTOR_HIGH) * sigma
    elif scenario is Scenario.S3:
        y_hat = CONSTANT_FACTOR * y_hat
    elif scenario is Scenario.S4:
        h = linear_factors(n, FACTOR_LOW, FACTOR_HIGH)
        y_hat = h * y_hat
        sigma = (2.0 - h) * sigma
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    return GaussianPredictionSet(preds.y, y_hat, sigma)


# -- synthetic targets --------------------------------------------------------


def euclidean(a, b):
    return np.sqrt(np.asarray(a) ** 2 + np.asarray(b) ** 2)


def arctan(x):
    return np.arctan(x)


def friedman1(x):
    x = np.atleast_2d(x)
    return (
        10.0 * np.sin(math.pi * x[:, 0] * x[:, 1])
        + 20.0 * (x[:, 2] - 0.5) ** 2
        + 10.0 * x[:, 3]
        + 5.0 * x[:, 4]
    )


def friedman2(x):
    x = np.atleast_2d(x)
    return np.sqrt(x[:, 0] ** 2 + (x[:, 1] * x[:, 2] - 1.0 / (x[:, 1] * x[:, 3])) ** 2)


def friedman3(x):
    x = np.atleast_2d(x)
    return np.arctan((x[:, 1] * x[:, 2] - 1.0 / (x[:, 1] * x[:, 3])) / x[:, 0])


def _friedman23_features(u: np.ndarray) -> np.ndarray:
    # conventional ranges: x0 in [0,100], x1 in [40pi,560pi], x2 in [0,1], x3 in [1,11]
    x = u.copy()
    x[:, 0] *= 100.0
    x[:, 1] = 40.0 * math.pi + 520.0 * math.pi * x[:, 1]
    x[:, 3] = 1.0 + 10.0 * x[:, 3]
    return x


SYNTHETIC_TARGETS = {
    "euclidean": 2,
    "arctan": 1,
    "friedman1": 5,
    "friedman2": 4,
    "friedman3": 4,
}


def synth_target(name: str, n: int, seed: int = 0) -> np.ndarray:
    """Noise-free targets of a named synthetic function on uniform random features."""
    if name not in SYNTHETIC_TARGETS:
        raise ValueError(
            f"unknown synthetic target {name!r}; choose from {sorted(SYNTHETIC_TARGETS)}"
        )
    if n < 1:
        raise ValueError("n must be positive")
    d = SYNTHETIC_TARGETS[name]
    u = PhiloxStream(seed).uniform(n * d).reshape(n, d)
    if name == "euclidean":
        return euclidean(u[:, 0], u[:, 1])
    if name == "arctan":
        return arctan(u[:, 0])
    if name == "friedman1":
        return friedman1(u)
    if name == "friedman2":
        return friedman2(_friedman23_features(u))
    return friedman3(_friedman23_features(u))
