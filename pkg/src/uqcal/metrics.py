"""Regression calibration metrics.

Every function is pure: it reads a prediction set (and configuration) and
returns a float. ``evaluate_all`` bundles the full suite into a
:class:`MetricReport`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from .binning import partition_equal_count_by_sigma, partition_equal_width_by_variance
from .core import (
    ConfidenceLevels,
    GaussianPredictionSet,
    IntervalPredictionSet,
    chi2_1_quantile,
    gaussian_to_intervals,
    pit,
    standard_normal_cdf,
    standard_normal_pdf,
    standard_normal_quantile,
)

# Report order is part of the output schema: append new names, never rename.
METRIC_NAMES = (
    "picp",
    "cwc",
    "interval_score",
    "crps",
    "nll",
    "cals",
    "cals_rmse",
    "ence",
    "ecpe",
    "uce",
    "qce",
    "rmse",
    "sharpness",
    "pinball",
)
INTERVAL_METRIC_NAMES = ("picp", "mpiw", "nmpiw", "cwc", "interval_score")

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


def _default_levels() -> ConfidenceLevels:
    return ConfidenceLevels.midpoints(10)


def _default_tau_grid() -> tuple[float, ...]:
    return tuple(float(p) for p in _default_levels().levels)


@dataclass(frozen=True)
class MetricConfig:
    n_bins: int = 10
    nominal_level: float = 0.95
    eta: float = 50.0
    levels: ConfidenceLevels = field(default_factory=_default_levels)
    alpha: float = 0.05
    tau_grid: tuple[float, ...] = field(default_factory=_default_tau_grid)

    def __post_init__(self):
        if int(self.n_bins) != self.n_bins or self.n_bins < 1:
            raise ValueError(f"n_bins must be a positive integer, got {self.n_bins!r}")
        for name in ("nominal_level", "alpha"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if not self.eta > 0.0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        tau_grid = tuple(float(t) for t in self.tau_grid)
        if not tau_grid or any(not 0.0 < t < 1.0 for t in tau_grid):
            raise ValueError("tau_grid must be non-empty with entries in (0, 1)")
        object.__setattr__(self, "tau_grid", tau_grid)
        object.__setattr__(self, "n_bins", int(self.n_bins))
        object.__setattr__(self, "nominal_level", float(self.nominal_level))
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "alpha", float(self.alpha))

    def to_dict(self) -> dict:
        return {
            "n_bins": self.n_bins,
            "confidence": self.nominal_level,
            "eta": self.eta,
            "alpha": self.alpha,
            "levels": [float(p) for p in self.levels.levels],
            "level_weights": [float(w) for w in self.levels.weights],
            "tau_grid": list(self.tau_grid),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricConfig":
        return cls(
            n_bins=d["n_bins"],
            nominal_level=d["confidence"],
            eta=d["eta"],
            alpha=d["alpha"],
            levels=ConfidenceLevels(d["levels"], d["level_weights"]),
            tau_grid=tuple(d["tau_grid"]),
        )


@dataclass(frozen=True)
class MetricReport:
    """Metric values keyed by name. ``None`` marks an undefined value."""

    values: dict[str, float | None]
    config: MetricConfig
    n_samples: int

    def __getitem__(self, name: str) -> float | None:
        return self.values[name]

    @property
    def undefined(self) -> tuple[str, ...]:
        return tuple(k for k, v in self.values.items() if v is None)


# -- interval metrics ---------------------------------------------------------


def picp(ints: IntervalPredictionSet) -> float:
    covered = (ints.lower <= ints.y) & (ints.y <= ints.upper)
    return float(np.mean(covered))


def mpiw(ints: IntervalPredictionSet) -> float:
    return float(np.mean(ints.width))


def target_range(y) -> float:
    y = np.asarray(y, dtype=np.float64)
    return float(y.max() - y.min())


def nmpiw(ints: IntervalPredictionSet, target_range: float) -> float:
    if not target_range > 0.0:
        raise ValueError(f"target range must be positive, got {target_range}")
    return mpiw(ints) / target_range


def cwc(ints: IntervalPredictionSet, cfg: MetricConfig, target_range: float) -> float:
    """Coverage width-based criterion.

    Equal to NMPIW when coverage reaches the nominal level, otherwise
    inflated by ``1 + exp(-eta * (PICP - level))``.
    """
    width = nmpiw(ints, target_range)
    coverage = picp(ints)
    if coverage >= cfg.nominal_level:
        return width
    return width * (1.0 + math.exp(-cfg.eta * (coverage - cfg.nominal_level)))


def interval_score(ints: IntervalPredictionSet, alpha: float = 0.05) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    below = np.maximum(ints.lower - ints.y, 0.0)
    above = np.maximum(ints.y - ints.upper, 0.0)
    return float(np.mean(ints.width + (2.0 / alpha) * (below + above)))


# -- density metrics ----------------------------------------------------------


def crps_gaussian(preds: GaussianPredictionSet) -> float:
    z = preds.residuals / preds.sigma
    per_sample = preds.sigma * (
        z * (2.0 * standard_normal_cdf(z) - 1.0) + 2.0 * standard_normal_pdf(z) - _INV_SQRT_PI
    )
    return float(np.mean(per_sample))


def crps_integral_oracle(mu: float, sigma: float, y: float, n_points: int = 60001) -> float:
    """CRPS of N(mu, sigma**2) at ``y`` by trapezoid quadrature of its defining integral.

    Reference path for testing :func:`crps_gaussian`; the grid has a node at
    ``y`` so the indicator jump never falls inside a panel.
    """
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    lo = min(mu - 12.0 * sigma, y)
    hi = max(mu + 12.0 * sigma, y)
    total = 0.0
    if y > lo:
        z = np.linspace(lo, y, n_points)
        total += np.trapezoid(standard_normal_cdf((z - mu) / sigma) ** 2, z)
    if hi > y:
        z = np.linspace(y, hi, n_points)
        # 1 - F(z) written as the upper tail keeps precision far right of mu
        total += np.trapezoid(standard_normal_cdf((mu - z) / sigma) ** 2, z)
    return float(total)


def nll_gaussian(preds: GaussianPredictionSet) -> float:
    var = preds.variance
    return float(np.mean(preds.residuals**2 / (2.0 * var) + 0.5 * np.log(2.0 * math.pi * var)))


def _empirical_frequencies(preds: GaussianPredictionSet, levels: ConfidenceLevels) -> np.ndarray:
    u = np.sort(pit(preds))
    return np.searchsorted(u, levels.levels, side="right") / u.size


def cals(preds: GaussianPredictionSet, levels: ConfidenceLevels | None = None) -> float:
    levels = levels or _default_levels()
    gap = levels.levels - _empirical_frequencies(preds, levels)
    return float(np.sum(levels.weights * gap**2))


def cals_rmse(preds: GaussianPredictionSet, levels: ConfidenceLevels | None = None) -> float:
    levels = levels or _default_levels()
    gap = levels.levels - _empirical_frequencies(preds, levels)
    return float(np.sqrt(np.mean(gap**2)))


def ence(preds: GaussianPredictionSet, n_bins: int = 10) -> float:
    partition = partition_equal_count_by_sigma(preds.sigma, n_bins)
    sq_res = preds.residuals**2
    var = preds.variance
    terms = []
    for members in partition.bins:
        rmv = math.sqrt(np.mean(var[members]))
        rmse_bin = math.sqrt(np.mean(sq_res[members]))
        terms.append(abs(rmv - rmse_bin) / rmv)
    return float(np.mean(terms))


def ecpe(preds: GaussianPredictionSet, levels: ConfidenceLevels | None = None) -> float:
    levels = levels or _default_levels()
    gaps = [abs(p - picp(gaussian_to_intervals(preds, p))) for p in levels.levels]
    return float(np.mean(gaps))


def _bin_weighted_sum(sizes, values) -> float:
    """sum_j (|B_j| / N) * values_j, evaluated exactly and rounded once."""
    total = sum(Fraction(int(k)) * Fraction(float(v)) for k, v in zip(sizes, values))
    return float(total / int(sum(sizes)))


def uce(preds: GaussianPredictionSet, n_bins: int = 10) -> float:
    var = preds.variance
    partition = partition_equal_width_by_variance(var, n_bins)
    sq_res = preds.residuals**2
    gaps = [abs(np.mean(sq_res[m]) - np.mean(var[m])) for m in partition.bins]
    return _bin_weighted_sum(partition.sizes, gaps)


def qce(preds: GaussianPredictionSet, tau: float, n_bins: int = 10) -> float:
    threshold = chi2_1_quantile(tau)
    nees = preds.residuals**2 / preds.variance
    inside = nees <= threshold
    partition = partition_equal_count_by_sigma(preds.sigma, n_bins)
    gaps = [abs(np.mean(inside[m]) - tau) for m in partition.bins]
    return _bin_weighted_sum(partition.sizes, gaps)


def qce_mean(preds: GaussianPredictionSet, tau_grid=None, n_bins: int = 10) -> float:
    tau_grid = _default_tau_grid() if tau_grid is None else tau_grid
    return float(np.mean([qce(preds, t, n_bins) for t in tau_grid]))


def rmse(preds: GaussianPredictionSet) -> float:
    return float(np.sqrt(np.mean(preds.residuals**2)))


def sharpness(preds: GaussianPredictionSet) -> float:
    return float(np.sqrt(np.mean(preds.variance)))


def pinball(preds: GaussianPredictionSet, tau_grid=None) -> float:
    """Check loss of the Gaussian quantiles, averaged over samples and levels."""
    tau = np.asarray(_default_tau_grid() if tau_grid is None else tau_grid, dtype=np.float64)
    q = preds.y_hat[:, None] + preds.sigma[:, None] * standard_normal_quantile(tau)[None, :]
    diff = preds.y[:, None] - q
    loss = np.where(diff >= 0.0, tau * diff, (tau - 1.0) * diff)
    return float(np.mean(loss))


# -- suites -------------------------------------------------------------------


def evaluate_all(preds: GaussianPredictionSet, cfg: MetricConfig | None = None) -> MetricReport:
    """Compute the full metric suite.

    Interval metrics use central intervals at ``cfg.nominal_level``. CWC is
    undefined (``None``) when all targets are equal; ENCE and QCE are
    undefined when there are fewer samples than bins.
    """
    cfg = cfg or MetricConfig()
    # intervals in residual coordinates: same coverage and widths, exact under translation
    centered = GaussianPredictionSet(preds.residuals, np.zeros(len(preds)), preds.sigma)
    ints = gaussian_to_intervals(centered, cfg.nominal_level)
    r = target_range(preds.y)
    # equal-count binning needs at least one sample per bin
    binnable = cfg.n_bins <= len(preds)
    values = {
        "picp": picp(ints),
        "cwc": cwc(ints, cfg, r) if r > 0.0 else None,
        "interval_score": interval_score(ints, cfg.alpha),
        "crps": crps_gaussian(preds),
        "nll": nll_gaussian(preds),
        "cals": cals(preds, cfg.levels),
        "cals_rmse": cals_rmse(preds, cfg.levels),
        "ence": ence(preds, cfg.n_bins) if binnable else None,
        "ecpe": ecpe(preds, cfg.levels),
        "uce": uce(preds, cfg.n_bins),
        "qce": qce_mean(preds, cfg.tau_grid, cfg.n_bins) if binnable else None,
        "rmse": rmse(preds),
        "sharpness": sharpness(preds),
        "pinball": pinball(preds, cfg.tau_grid),
    }
    return MetricReport(values, cfg, len(preds))


def evaluate_intervals(ints: IntervalPredictionSet, cfg: MetricConfig | None = None) -> MetricReport:
    """Interval-only subset: PICP, MPIW, NMPIW, CWC and the interval score.

    The interval set's own nominal level overrides ``cfg.nominal_level``.
    """
    cfg = cfg or MetricConfig()
    r = target_range(ints.y)
    cwc_cfg = MetricConfig(
        n_bins=cfg.n_bins,
        nominal_level=ints.nominal_level,
        eta=cfg.eta,
        levels=cfg.levels,
        alpha=cfg.alpha,
        tau_grid=cfg.tau_grid,
    )
    values = {
        "picp": picp(ints),
        "mpiw": mpiw(ints),
        "nmpiw": nmpiw(ints, r) if r > 0.0 else None,
        "cwc": cwc(ints, cwc_cfg, r) if r > 0.0 else None,
        "interval_score": interval_score(ints, cfg.alpha),
    }
    return MetricReport(values, cwc_cfg, len(ints))
