"""Cross-dataset normalization, before/after verdicts and detection studies."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .metrics import MetricConfig, MetricReport, evaluate_all
from .synth import CalibratedGenConfig, Scenario, apply_scenario, generate_calibrated

IMPROVED = "improved"
DEGRADED = "degraded"
NEGLIGIBLE = "negligible"

DEFAULT_THRESHOLD = 0.03
ZERO_BASELINE = 1e-12
ABSOLUTE_THRESHOLD = 1e-9

# +1: lower is better. PICP enters through its gap to the nominal level.
DIRECTION = {
    "picp": 1,
    "mpiw": 1,
    "nmpiw": 1,
    "cwc": 1,
    "interval_score": 1,
    "crps": 1,
    "nll": 1,
    "cals": 1,
    "cals_rmse": 1,
    "ence": 1,
    "ecpe": 1,
    "uce": 1,
    "qce": 1,
    "rmse": 1,
    "sharpness": 1,
    "pinball": 1,
}


def _scored_value(name: str, value: float | None, nominal_level: float) -> float | None:
    if value is None:
        return None
    return abs(value - nominal_level) if name == "picp" else value


# -- normalization ------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedTable:
    """Datasets x metrics, each column divided by its cross-dataset mean magnitude.

    ``values[i, j]`` is NaN exactly when ``metrics[j]`` is listed in
    ``undefined``.
    """

    datasets: tuple[str, ...]
    metrics: tuple[str, ...]
    values: np.ndarray
    means: dict[str, float | None]
    undefined: tuple[str, ...] = ()

    def column(self, metric: str) -> np.ndarray:
        return self.values[:, self.metrics.index(metric)]

    def ranking(self, metric: str) -> list[str]:
        """Datasets ordered best-first for ``metric``."""
        col = self.column(metric)
        order = np.argsort(DIRECTION.get(metric, 1) * col, kind="stable")
        return [self.datasets[i] for i in order]


def normalize_across_datasets(
    reports: list[MetricReport], nominal_level: float = 0.95, labels=None
) -> NormalizedTable:
    if not reports:
        raise ValueError("need at least one report")
    metrics = tuple(reports[0].values)
    for rep in reports[1:]:
        if tuple(rep.values) != metrics:
            raise ValueError("reports do not share the same metric set")
    labels = tuple(labels) if labels is not None else tuple(f"d{i}" for i in range(len(reports)))
    if len(labels) != len(reports):
        raise ValueError("one label per report required")

    raw = np.full((len(reports), len(metrics)), np.nan)
    undefined = []
    means: dict[str, float | None] = {}
    for j, name in enumerate(metrics):
        col = [_scored_value(name, rep.values[name], nominal_level) for rep in reports]
        if any(v is None for v in col):
            undefined.append(name)
            means[name] = None
            continue
        col = np.asarray(col, dtype=np.float64)
        mean = float(np.mean(col))
        means[name] = mean
        if mean == 0.0:
            undefined.append(name)
            continue
        # magnitude keeps the within-column ordering when the mean is negative (NLL)
        raw[:, j] = col / abs(mean)
    return NormalizedTable(labels, metrics, raw, means, tuple(undefined))


def rank_agreement(table: NormalizedTable) -> np.ndarray:
    """Spearman correlation between the dataset orderings of every metric pair.

    Average ranks handle ties. Two all-tied columns agree perfectly (1);
    a constant column against a varying one, or an undefined column, is NaN.
    """
    n = len(table.datasets)
    if n < 3:
        raise ValueError(f"rank agreement needs at least 3 datasets, got {n}")
    k = len(table.metrics)
    ranks = [None if np.any(np.isnan(table.values[:, j])) else rankdata(table.values[:, j]) for j in range(k)]
    out = np.full((k, k), np.nan)
    for a in range(k):
        for b in range(a, k):
            ra, rb = ranks[a], ranks[b]
            if ra is None or rb is None:
                continue
            da, db = ra - ra.mean(), rb - rb.mean()
            sa, sb = np.sqrt(np.sum(da**2)), np.sqrt(np.sum(db**2))
            if a == b or (sa == 0.0 and sb == 0.0):
                rho = 1.0
            elif sa == 0.0 or sb == 0.0:
                rho = np.nan
            else:
                rho = float(np.clip(np.sum(da * db) / (sa * sb), -1.0, 1.0))
            out[a, b] = out[b, a] = rho
    return out


# -- verdicts -----------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioVerdict:
    metric: str
    before: float
    after: float
    relative_change: float
    classification: str


def _classify(before: float, after: float, threshold: float) -> tuple[float, str]:
    if abs(before) < ZERO_BASELINE:
        change = after - before
        limit = ABSOLUTE_THRESHOLD
    else:
        change = (after - before) / abs(before)
        limit = threshold
    if change > limit:
        return change, DEGRADED
    if change < -limit:
        return change, IMPROVED
    return change, NEGLIGIBLE


def classify_change(
    before: MetricReport, after: MetricReport, nominal_level: float | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> list[ScenarioVerdict]:
    """Label each metric's before/after change as improved, degraded or negligible.

    Metrics undefined on either side are omitted. Near-zero baselines fall
    back to an absolute change, in which case ``relative_change`` holds that
    absolute difference.
    """
    if before.config != after.config:
        raise ValueError("reports were produced with different configurations")
    if tuple(before.values) != tuple(after.values):
        raise ValueError("reports do not share the same metric set")
    level = before.config.nominal_level if nominal_level is None else nominal_level
    verdicts = []
    for name in before.values:
        b = _scored_value(name, before.values[name], level)
        a = _scored_value(name, after.values[name], level)
        if a is None or b is None:
            continue
        sign = DIRECTION.get(name, 1)
        change, label = _classify(sign * b, sign * a, threshold)
        verdicts.append(ScenarioVerdict(name, b, a, change, label))
    return verdicts


# -- detection study ----------------------------------------------------------


def derive_seed(base_seed: int, repeat: int, dataset_id: str) -> int:
    """First 8 bytes (big-endian) of SHA-256 over ``"{base_seed}:{repeat}:{dataset_id}"``."""
    digest = hashlib.sha256(f"{base_seed}:{repeat}:{dataset_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class DetectionSummary:
    """Detection frequencies per metric (rows) and dataset (columns)."""

    metrics: tuple[str, ...]
    datasets: tuple[str, ...]
    frequencies: np.ndarray
    repeats: int
    scenario: Scenario
    verdict_counts: dict = field(default_factory=dict)
    per_run: dict = field(default_factory=dict)

    def frequency(self, metric: str, dataset: str | None = None) -> float:
        j = 0 if dataset is None else self.datasets.index(dataset)
        return float(self.frequencies[self.metrics.index(metric), j])


def _one_repeat(y, dataset_id, scenario, repeat, base_seed, cfg, threshold):
    seed = derive_seed(base_seed, repeat, dataset_id)
    preds = generate_calibrated(y, CalibratedGenConfig(seed=seed))
    before = evaluate_all(preds, cfg)
    after = evaluate_all(apply_scenario(preds, scenario), cfg)
    return classify_change(before, after, threshold=threshold)


def _thread_count(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("UQCAL_THREADS", "1") or 1)
    return max(1, int(threads))


def detection_study(
    y_sources,
    scenario: Scenario = Scenario.S4,
    repeats: int = 100,
    base_seed: int = 0,
    cfg: MetricConfig | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    threads: int | None = None,
) -> DetectionSummary:
    """Repeat generate -> evaluate -> perturb -> evaluate -> classify.

    ``y_sources`` is a mapping ``{dataset_id: y}`` or a list of ``y`` vectors
    (ids ``d0, d1, ...``). Each (repeat, dataset) pair draws from its own
    derived seed, so results do not depend on ``threads`` (default taken from
    ``UQCAL_THREADS``) or on which other datasets are present.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    cfg = cfg or MetricConfig()
    if isinstance(y_sources, dict):
        sources = list(y_sources.items())
    else:
        sources = [(f"d{i}", y) for i, y in enumerate(y_sources)]
    if not sources:
        raise ValueError("need at least one target vector")

    jobs = [(ds, r) for ds, _ in sources for r in range(repeats)]
    lookup = dict(sources)

    def run(job):
        ds, r = job
        return _one_repeat(lookup[ds], ds, scenario, r, base_seed, cfg, threshold)

    workers = _thread_count(threads)
    if workers == 1:
        results = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))

    metrics = tuple(dict.fromkeys(v.metric for verdicts in results for v in verdicts))
    datasets = tuple(ds for ds, _ in sources)
    degraded = np.zeros((len(metrics), len(datasets)), dtype=np.int64)
    counts = {ds: {m: {IMPROVED: 0, DEGRADED: 0, NEGLIGIBLE: 0} for m in metrics} for ds in datasets}
    per_run = {ds: [None] * repeats for ds in datasets}
    for (ds, r), verdicts in zip(jobs, results):
        j = datasets.index(ds)
        tally = {IMPROVED: 0, DEGRADED: 0, NEGLIGIBLE: 0}
        for v in verdicts:
            counts[ds][v.metric][v.classification] += 1
            tally[v.classification] += 1
            if v.classification == DEGRADED:
                degraded[metrics.index(v.metric), j] += 1
        per_run[ds][r] = tally
    return DetectionSummary(
        metrics, datasets, degraded / repeats, repeats, scenario, counts, per_run
    )
