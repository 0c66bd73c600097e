"""Prediction-set value types and the Gaussian kernel shared by every metric."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

__all__ = [
    "GaussianPredictionSet",
    "IntervalPredictionSet",
    "ConfidenceLevels",
    "standard_normal_pdf",
    "standard_normal_cdf",
    "standard_normal_quantile",
    "chi2_1_quantile",
    "gaussian_to_intervals",
    "pit",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _frozen_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.size < 1:
        raise ValueError(f"{name} must contain at least one sample")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class GaussianPredictionSet:
    """Truths ``y`` paired with Gaussian predictions N(``y_hat``, ``sigma``**2)."""

    y: np.ndarray
    y_hat: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        y = _frozen_vector(self.y, "y")
        y_hat = _frozen_vector(self.y_hat, "y_hat")
        sigma = _frozen_vector(self.sigma, "sigma")
        if not (y.size == y_hat.size == sigma.size):
            raise ValueError(
                f"length mismatch: y={y.size}, y_hat={y_hat.size}, sigma={sigma.size}"
            )
        if np.any(sigma <= 0.0):
            raise ValueError("sigma must be strictly positive")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_hat", y_hat)
        object.__setattr__(self, "sigma", sigma)

    def __len__(self) -> int:
        return self.y.size

    @property
    def residuals(self) -> np.ndarray:
        return self.y - self.y_hat

    @property
    def variance(self) -> np.ndarray:
        return self.sigma**2


@dataclass(frozen=True, eq=False)
class IntervalPredictionSet:
    """Truths ``y`` with prediction intervals ``[lower, upper]`` at ``nominal_level``."""

    y: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    nominal_level: float

    def __post_init__(self):
        y = _frozen_vector(self.y, "y")
        lower = _frozen_vector(self.lower, "lower")
        upper = _frozen_vector(self.upper, "upper")
        if not (y.size == lower.size == upper.size):
            raise ValueError(
                f"length mismatch: y={y.size}, lower={lower.size}, upper={upper.size}"
            )
        if np.any(lower > upper):
            bad = int(np.flatnonzero(lower > upper)[0])
            raise ValueError(f"lower > upper at sample {bad}")
        level = float(self.nominal_level)
        if not 0.0 < level < 1.0:
            raise ValueError(f"nominal_level must lie in (0, 1), got {level}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "nominal_level", level)

    def __len__(self) -> int:
        return self.y.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


@dataclass(frozen=True, eq=False)
class ConfidenceLevels:
    """Strictly increasing probabilities in (0, 1) with nonnegative weights."""

    levels: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        levels = _frozen_vector(self.levels, "levels")
        if self.weights is None:
            weights = np.ones_like(levels)
            weights.flags.writeable = False
        else:
            weights = _frozen_vector(self.weights, "weights")
        if weights.size != levels.size:
            raise ValueError("levels and weights must have the same length")
        if np.any((levels <= 0.0) | (levels >= 1.0)):
            raise ValueError("confidence levels must lie strictly inside (0, 1)")
        if np.any(np.diff(levels) <= 0.0):
            raise ValueError("confidence levels must be strictly increasing")
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def midpoints(cls, m: int = 10) -> "ConfidenceLevels":
        """Levels (j - 0.5)/m for j = 1..m with unit weights."""
        return cls((np.arange(1, m + 1) - 0.5) / m)

    def __len__(self) -> int:
        return self.levels.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfidenceLevels):
            return NotImplemented
        return np.array_equal(self.levels, other.levels) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self) -> int:
        return hash((self.levels.tobytes(), self.weights.tobytes()))


def standard_normal_pdf(z):
    z = np.asarray(z, dtype=np.float64)
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def standard_normal_cdf(z):
    # erfc keeps full relative precision in the lower tail, unlike 1 + erf
    z = np.asarray(z, dtype=np.float64)
    return 0.5 * erfc(-z / math.sqrt(2.0))


# Acklam's rational approximation, relative error ~1.15e-9 before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p: np.ndarray) -> np.ndarray:
    x = np.empty_like(p)
    low = p < _P_LOW
    high = p > 1.0 - _P_LOW
    mid = ~(low | high)

    q = p[mid] - 0.5
    r = q * q
    num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    x[mid] = q * num / den

    for mask, sign, tail in ((low, 1.0, p[low]), (high, -1.0, 1.0 - p[high])):
        q = np.sqrt(-2.0 * np.log(tail))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[mask] = sign * num / den
    return x


def standard_normal_quantile(p):
    """Inverse standard normal CDF.

    A rational initial guess refined by two Halley steps against
    :func:`standard_normal_cdf`. Raises ``ValueError`` outside (0, 1).
    """
    scalar = np.ndim(p) == 0
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if np.any(~np.isfinite(p)) or np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("quantile probability must lie strictly inside (0, 1)")
    x = _acklam(p)
    upper = p > 0.5
    for _ in range(2):
        # residual on the smaller tail avoids cancellation near p = 1
        err = np.where(upper, (1.0 - p) - standard_normal_cdf(-x), standard_normal_cdf(x) - p)
        u = err * _SQRT_2PI * np.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return float(x[0]) if scalar else x


def chi2_1_quantile(tau):
    """Quantile of the chi-squared distribution with one degree of freedom.

    Uses F(a) = 2*Phi(sqrt(a)) - 1, so the quantile is Phi^{-1}((tau + 1)/2)**2.
    """
    tau_arr = np.asarray(tau, dtype=np.float64)
    if np.any(~np.isfinite(tau_arr)) or np.any((tau_arr <= 0.0) | (tau_arr >= 1.0)):
        raise ValueError("tau must lie strictly inside (0, 1)")
    z = standard_normal_quantile(0.5 * (tau_arr + 1.0))
    return z * z


def gaussian_to_intervals(preds: GaussianPredictionSet, level: float) -> IntervalPredictionSet:
    """Central prediction intervals ``y_hat -/+ z * sigma`` with coverage ``level``."""
    level = float(level)
    z = standard_normal_quantile(0.5 * (1.0 + level))
    half = z * preds.sigma
    return IntervalPredictionSet(preds.y, preds.y_hat - half, preds.y_hat + half, level)


def pit(preds: GaussianPredictionSet) -> np.ndarray:
    return standard_normal_cdf((preds.y - preds.y_hat) / preds.sigma)
