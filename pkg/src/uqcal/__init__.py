"""Calibration metrics for regression uncertainty and a controlled-miscalibration benchmark."""

__version__ = "0.1.0"

from .core import (
    ConfidenceLevels,
    GaussianPredictionSet,
    IntervalPredictionSet,
    gaussian_to_intervals,
    pit,
)
from .metrics import MetricConfig, MetricReport, evaluate_all, evaluate_intervals
from .synth import CalibratedGenConfig, Scenario, apply_scenario, generate_calibrated, synth_target
from .analysis import classify_change, detection_study, normalize_across_datasets, rank_agreement
