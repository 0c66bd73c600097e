"""Command-line front end.

    uqcal evaluate  --input preds.csv [--format gaussian|interval] [metric flags]
    uqcal perturb   --input preds.csv --scenario s1 --output perturbed.csv
    uqcal benchmark --targets synthetic:friedman1:2000 --scenario s4 --repeats 100 --seed 7
    uqcal rank      --input reports/

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import DEFAULT_THRESHOLD, detection_study, normalize_across_datasets, rank_agreement
from .core import GaussianPredictionSet, IntervalPredictionSet
from .metrics import MetricConfig, MetricReport, evaluate_all, evaluate_intervals
from .synth import SYNTHETIC_TARGETS, Scenario, apply_scenario, synth_target

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

HEADERS = {
    "gaussian": ("y", "y_hat", "sigma"),
    "interval": ("y", "lower", "upper"),
}

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# -- wire formats -------------------------------------------------------------


def _parse_number(text: str, line: int, column: str) -> float:
    if not _NUMBER.fullmatch(text):
        raise DataError(f"line {line}: column {column!r}: not a decimal number: {text!r}")
    value = float(text)
    if not math.isfinite(value):
        raise DataError(f"line {line}: column {column!r}: value out of range: {text!r}")
    return value


def read_columns(path: Path, header: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Read a strict CSV whose first row equals ``header``."""
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows or tuple(rows[0]) != header:
        found = ",".join(rows[0]) if rows else "<empty file>"
        raise DataError(f"line 1: expected header {','.join(header)!r}, found {found!r}")
    columns = {name: [] for name in header}
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            raise DataError(f"line {line}: empty record")
        if len(row) != len(header):
            raise DataError(f"line {line}: expected {len(header)} fields, found {len(row)}")
        for name, cell in zip(header, row):
            columns[name].append(_parse_number(cell, line, name))
    if not columns[header[0]]:
        raise DataError(f"{path}: no records after the header")
    return {k: np.array(v) for k, v in columns.items()}


def read_gaussian(path: Path) -> GaussianPredictionSet:
    cols = read_columns(path, HEADERS["gaussian"])
    bad = np.flatnonzero(cols["sigma"] <= 0.0)
    if bad.size:
        raise DataError(f"line {bad[0] + 2}: sigma must be strictly positive")
    return GaussianPredictionSet(cols["y"], cols["y_hat"], cols["sigma"])


def read_intervals(path: Path, nominal_level: float) -> IntervalPredictionSet:
    cols = read_columns(path, HEADERS["interval"])
    bad = np.flatnonzero(cols["lower"] > cols["upper"])
    if bad.size:
        raise DataError(f"line {bad[0] + 2}: lower bound exceeds upper bound")
    return IntervalPredictionSet(cols["y"], cols["lower"], cols["upper"], nominal_level)


def write_gaussian(preds: GaussianPredictionSet, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADERS["gaussian"])
    for row in zip(preds.y, preds.y_hat, preds.sigma):
        writer.writerow([repr(float(v)) for v in row])


def read_targets(spec: str, seed: int) -> tuple[str, np.ndarray]:
    """``synthetic:<name>:<n>`` or a CSV file with a single ``y`` column."""
    if spec.startswith("synthetic:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"malformed target spec {spec!r}; use synthetic:<name>:<n>")
        _, name, n = parts
        if name not in SYNTHETIC_TARGETS:
            raise UsageError(
                f"unknown synthetic target {name!r}; choose from {', '.join(sorted(SYNTHETIC_TARGETS))}"
            )
        if not n.isdigit() or int(n) < 2:
            raise UsageError(f"sample count in {spec!r} must be an integer >= 2")
        return spec, synth_target(name, int(n), seed)
    path = Path(spec)
    return path.stem, read_columns(path, ("y",))["y"]


def _json_value(x):
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    if isinstance(x, np.ndarray):
        return _json_value(x.tolist())
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def dump_report(doc: dict) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(_json_value(doc), indent=2, allow_nan=False) + "\n"


def report_document(command: str, report: MetricReport, seed=None, **extra) -> dict:
    doc = {
        "tool": "uqcal",
        "version": __version__,
        "command": command,
        "config": {**report.config.to_dict(), "seed": seed},
        "n_samples": report.n_samples,
        "metrics": dict(report.values),
    }
    doc.update(extra)
    return doc


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


# -- commands -----------------------------------------------------------------


def _config(args) -> MetricConfig:
    try:
        return MetricConfig(
            n_bins=args.bins if args.bins is not None else 10,
            nominal_level=args.confidence,
            eta=args.eta,
            alpha=args.alpha,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_evaluate(args) -> int:
    if args.format == "interval" and args.bins is not None:
        raise UsageError("--bins has no effect on interval input (no binned metrics)")
    cfg = _config(args)
    path = Path(args.input)
    if args.format == "gaussian":
        report = evaluate_all(read_gaussian(path), cfg)
    else:
        report = evaluate_intervals(read_intervals(path, cfg.nominal_level), cfg)
    _emit(dump_report(report_document("evaluate", report, format=args.format)), args.output)
    return EXIT_OK


def cmd_perturb(args) -> int:
    if args.format != "gaussian":
        raise UsageError("perturb supports only gaussian input (y,y_hat,sigma)")
    scenario = Scenario.parse(args.scenario)
    preds = read_gaussian(Path(args.input))
    perturbed = apply_scenario(preds, scenario)
    if args.output is None or args.output == "-":
        write_gaussian(perturbed, sys.stdout)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_gaussian(perturbed, fh)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = _config(args)
    if args.repeats < 1:
        raise UsageError("--repeats must be at least 1")
    scenario = Scenario.parse(args.scenario)
    sources = dict(read_targets(t, args.seed) for t in (args.targets or ["synthetic:friedman1:2000"]))
    summary = detection_study(
        sources, scenario, args.repeats, args.seed, cfg, threshold=args.threshold
    )
    doc = {
        "tool": "uqcal",
        "version": __version__,
        "command": "benchmark",
        "config": {**cfg.to_dict(), "seed": args.seed},
        "scenario": scenario.value,
        "repeats": args.repeats,
        "threshold": args.threshold,
        "n_samples": {ds: int(np.size(y)) for ds, y in sources.items()},
        "detection": {
            "metrics": list(summary.metrics),
            "datasets": list(summary.datasets),
            "frequencies": summary.frequencies,
        },
        "verdict_counts": summary.verdict_counts,
        "per_run": summary.per_run,
    }
    _emit(dump_report(doc), args.output)
    return EXIT_OK


def cmd_rank(args) -> int:
    directory = Path(args.input)
    if not directory.is_dir():
        raise DataError(f"{directory} is not a directory")
    files = sorted(directory.glob("*.json"))
    docs = []
    for f in files:
        try:
            doc = json.loads(f.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"{f}: cannot parse report: {exc}") from exc
        if doc.get("command") == "evaluate":
            docs.append((f, doc))
    if not docs:
        raise DataError(f"no evaluate reports found in {directory}")

    reference = {k: v for k, v in docs[0][1]["config"].items() if k != "seed"}
    offenders = [
        f.name for f, d in docs
        if {k: v for k, v in d["config"].items() if k != "seed"} != reference
        or list(d["metrics"]) != list(docs[0][1]["metrics"])
    ]
    if offenders:
        raise DataError(
            f"reports differ in configuration from {docs[0][0].name}: {', '.join(offenders)}"
        )

    cfg = MetricConfig.from_dict(reference)
    reports = [MetricReport(d["metrics"], cfg, d["n_samples"]) for _, d in docs]
    labels = [f.stem for f, _ in docs]
    table = normalize_across_datasets(reports, cfg.nominal_level, labels)
    agreement = rank_agreement(table) if len(reports) >= 3 else None
    out = {
        "tool": "uqcal",
        "version": __version__,
        "command": "rank",
        "config": reference,
        "datasets": list(table.datasets),
        "metrics": list(table.metrics),
        "normalized": table.values,
        "means": table.means,
        "undefined": list(table.undefined),
        "rankings": {m: table.ranking(m) for m in table.metrics if m not in table.undefined},
        "rank_agreement": agreement,
    }
    _emit(dump_report(out), args.output)
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _metric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bins", type=int, default=None, help="number of bins (default 10)")
    p.add_argument("--confidence", type=float, default=0.95, help="nominal level (default 0.95)")
    p.add_argument("--eta", type=float, default=50.0, help="CWC penalty (default 50)")
    p.add_argument("--alpha", type=float, default=0.05, help="interval score alpha (default 0.05)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uqcal", description="Regression calibration metrics and benchmark.")
    parser.add_argument("--version", action="version", version=f"uqcal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="compute metrics for a prediction file")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=sorted(HEADERS), default="gaussian")
    p.add_argument("--output")
    _metric_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("perturb", help="apply a miscalibration scenario to a prediction file")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=sorted(HEADERS), default="gaussian")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; perturbations are deterministic")
    p.add_argument("--output")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("benchmark", help="repeated controlled-miscalibration detection study")
    p.add_argument("--targets", action="append", help="synthetic:<name>:<n> or CSV with a y column; repeatable")
    p.add_argument("--scenario", default="s4")
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--output")
    _metric_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("rank", help="normalize evaluate reports and compare metric orderings")
    p.add_argument("--input", required=True, help="directory of evaluate reports")
    p.add_argument("--output")
    p.set_defaults(func=cmd_rank)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
