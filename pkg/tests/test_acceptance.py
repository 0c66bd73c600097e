"""Exit criteria for the package, one test per criterion.

Run ``pytest tests/test_acceptance.py -v`` and read the "acceptance criteria"
section of the terminal summary for one PASS/FAIL line per criterion.
"""

import os
import subprocess
import sys
import time

import numpy as np
import pytest

from uqcal.analysis import derive_seed, detection_study
from uqcal.core import GaussianPredictionSet, IntervalPredictionSet, chi2_1_quantile, gaussian_to_intervals
from uqcal.metrics import (
    MetricConfig,
    crps_gaussian,
    crps_integral_oracle,
    cwc,
    ecpe,
    ence,
    evaluate_all,
    interval_score,
    nll_gaussian,
    nmpiw,
    picp,
    qce,
)
from uqcal.synth import CalibratedGenConfig, PhiloxStream, Scenario, generate_calibrated, synth_target

BASE_SEED = 7
N_SEEDS = 20
REPEATS = 100


@pytest.fixture(scope="module")
def friedman_2000():
    return {"friedman1": synth_target("friedman1", 2000, seed=BASE_SEED)}


def timed_study(sources, scenario, n_repeats=REPEATS):
    start = time.perf_counter()
    summary = detection_study(sources, scenario, n_repeats, BASE_SEED)
    return summary, time.perf_counter() - start


def test_c1_crps_matches_defining_integral(acceptance_log):
    start = time.perf_counter()
    worst = 0.0
    for sigma in (0.1, 1.0, 10.0):
        for z in np.arange(-4.0, 4.0 + 1e-9, 0.5):
            y = z * sigma
            closed = crps_gaussian(GaussianPredictionSet([y], [0.0], [sigma]))
            worst = max(worst, abs(closed - crps_integral_oracle(0.0, sigma, y)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 1.0
    assert acceptance_log("C1 CRPS closed form vs integral", ok, f"max |diff|={worst:.2e} (<1e-6), {elapsed:.2f}s (<1s)")


def test_c2_perfect_calibration_baseline(acceptance_log):
    start = time.perf_counter()
    y = synth_target("friedman1", 10_000, seed=BASE_SEED)
    cfg = MetricConfig()
    ecpes, qces, cals_rmses, picp_ok = [], [], [], 0
    for r in range(N_SEEDS):
        preds = generate_calibrated(y, CalibratedGenConfig(seed=derive_seed(BASE_SEED, r, "friedman1")))
        rep = evaluate_all(preds, cfg)
        ecpes.append(rep["ecpe"])
        qces.append(rep["qce"])
        cals_rmses.append(rep["cals_rmse"])
        picp_ok += 0.94 <= rep["picp"] <= 0.96
    elapsed = time.perf_counter() - start
    med = np.median(ecpes), np.median(qces), np.median(cals_rmses)
    ok = med[0] < 0.02 and med[1] < 0.05 and med[2] < 0.05 and picp_ok >= 0.95 * N_SEEDS and elapsed < 30
    detail = (
        f"median ECPE={med[0]:.4f} (<0.02), QCE={med[1]:.4f} (<0.05), CalS_RMSE={med[2]:.4f} (<0.05), "
        f"PICP in [0.94,0.96] for {picp_ok}/{N_SEEDS} (>=19), {elapsed:.1f}s (<30s)"
    )
    assert acceptance_log("C2 perfect-calibration baseline", ok, detail)


def test_c3_constant_sigma_offset(acceptance_log, friedman_2000):
    s, elapsed = timed_study(friedman_2000, Scenario.S1)
    freqs = {m: s.frequency(m) for m in ("cals", "ecpe", "qce")}
    ok = all(f >= 0.90 for f in freqs.values()) and elapsed < 60
    detail = ", ".join(f"{m}={f:.2f}" for m, f in freqs.items()) + f" (>=0.90), {elapsed:.1f}s (<60s)"
    assert acceptance_log("C3 S1 detection", ok, detail)


def test_c4_constant_mean_offset(acceptance_log, friedman_2000):
    s, elapsed = timed_study(friedman_2000, Scenario.S3)
    f = s.frequency("nll")
    ok = f >= 0.90 and elapsed < 60
    assert acceptance_log("C4 S3 detection", ok, f"nll={f:.2f} (>=0.90), {elapsed:.1f}s (<60s)")


def test_c5_heterogeneous_both(acceptance_log, friedman_2000):
    s, elapsed = timed_study(friedman_2000, Scenario.S4)
    f = {m: s.frequency(m) for m in ("ence", "cwc", "uce")}
    ok = f["ence"] >= 0.95 and f["cwc"] >= 0.95 and f["uce"] >= 0.90 and elapsed < 60
    detail = f"ence={f['ence']:.2f}, cwc={f['cwc']:.2f} (>=0.95), uce={f['uce']:.2f} (>=0.90), {elapsed:.1f}s (<60s)"
    assert acceptance_log("C5 S4 detection", ok, detail)


@pytest.mark.parametrize("target", ["arctan", "euclidean"])
def test_c6_sample_size_sensitivity(acceptance_log, target):
    small = detection_study(
        {target: synth_target(target, 150, seed=BASE_SEED)}, Scenario.S4, REPEATS, BASE_SEED
    )
    large = detection_study(
        {target: synth_target(target, 2000, seed=BASE_SEED)}, Scenario.S4, REPEATS, BASE_SEED
    )
    pairs = {m: (small.frequency(m), large.frequency(m)) for m in ("ence", "cwc", "qce")}
    ok = all(a < b for a, b in pairs.values())
    detail = ", ".join(f"{m}: N=150 {a:.2f} < N=2000 {b:.2f}" for m, (a, b) in pairs.items())
    assert acceptance_log(f"C6 sample-size sensitivity ({target})", ok, detail)


def test_c7_exact_identities(acceptance_log):
    rng = np.random.default_rng(BASE_SEED)
    checked = mismatches = 0
    while checked < 1000:
        n = int(rng.integers(1, 60))
        y = rng.normal(size=n)
        lo = y - rng.uniform(0, 2, n) * (rng.random(n) < 0.98)
        hi = y + rng.uniform(0, 2, n)
        lam = float(rng.uniform(0.05, 0.95))
        ints = IntervalPredictionSet(y, lo, hi, lam)
        if picp(ints) < lam:
            continue
        r = float(rng.uniform(0.1, 10))
        checked += 1
        mismatches += cwc(ints, MetricConfig(nominal_level=lam), r) != nmpiw(ints, r)

    y = rng.normal(0, 5, 1000)
    s = rng.uniform(0.5, 3, 1000)
    preds = GaussianPredictionSet(y, y + s * rng.normal(size=1000) * 1.3, s)
    base = ence(preds, 10)
    worst_scale = max(
        abs(ence(GaussianPredictionSet(c * preds.y, c * preds.y_hat, c * preds.sigma), 10) - base) / base
        for c in (0.1, 3.0, 1000.0)
    )

    exact = GaussianPredictionSet(y, y, s)
    qce_bad = [t for t in (0.05, 0.25, 0.5, 0.75, 0.95) if qce(exact, t, 10) != 1 - t]

    ok = mismatches == 0 and worst_scale < 1e-12 and not qce_bad
    detail = (
        f"CWC==NMPIW bitwise on {checked} sets ({mismatches} mismatches); "
        f"ENCE scale rel diff={worst_scale:.1e} (<1e-12); zero-residual QCE==1-tau exact: {not qce_bad}"
    )
    assert acceptance_log("C7 exact identities", ok, detail)


def test_c8_proper_scoring(acceptance_log):
    n = 20_000
    wins = {"crps": 0, "interval_score": 0, "nll": 0}
    for r in range(N_SEEDS):
        y = PhiloxStream(derive_seed(BASE_SEED, r, "proper")).normal(n)
        scores = {}
        for scale in (1.0, 1.5, 0.5):
            p = GaussianPredictionSet(y, np.zeros(n), np.full(n, scale))
            scores[scale] = {
                "crps": crps_gaussian(p),
                "interval_score": interval_score(gaussian_to_intervals(p, 0.95), 0.05),
                "nll": nll_gaussian(p),
            }
        for m in wins:
            wins[m] += scores[1.0][m] < scores[1.5][m] and scores[1.0][m] < scores[0.5][m]
    ok = all(w >= 0.95 * N_SEEDS for w in wins.values())
    detail = ", ".join(f"{m} {w}/{N_SEEDS}" for m, w in wins.items()) + " (>=19)"
    assert acceptance_log("C8 proper scoring", ok, detail)


def test_c9_benchmark_determinism(acceptance_log, tmp_path):
    args = [
        sys.executable, "-m", "uqcal", "benchmark",
        "--targets", "synthetic:friedman1:2000", "--scenario", "s4", "--repeats", "20", "--seed", "7",
    ]
    outputs = []
    for threads, tag in (("1", "a"), ("1", "b"), ("4", "c")):
        out = tmp_path / f"{tag}.json"
        env = {**os.environ, "UQCAL_THREADS": threads}
        subprocess.run(args + ["--output", str(out)], env=env, check=True)
        outputs.append(out.read_bytes())
    same_runs = outputs[0] == outputs[1]
    same_threads = outputs[0] == outputs[2]
    ok = same_runs and same_threads
    detail = f"two runs identical: {same_runs}; UQCAL_THREADS 1 vs 4 identical: {same_threads}"
    assert acceptance_log("C9 benchmark determinism", ok, detail)
