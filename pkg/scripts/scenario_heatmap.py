"""Detection frequency of every metric under each perturbation scenario.

Writes a long-format CSV (scenario, dataset, metric, frequency, improved,
negligible) over the synthetic targets, ready for a heatmap.

    python scripts/scenario_heatmap.py --n 2000 --repeats 100 --output heatmap.csv
"""

import argparse
import csv
import sys

from uqcal.analysis import IMPROVED, NEGLIGIBLE, detection_study
from uqcal.synth import SYNTHETIC_TARGETS, Scenario, synth_target


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=100)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--output", default="-")
    args = parser.parse_args()

    sources = {name: synth_target(name, args.n, args.seed) for name in SYNTHETIC_TARGETS}
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["scenario", "dataset", "metric", "degraded", "improved", "negligible"])
    for scenario in Scenario:
        summary = detection_study(sources, scenario, args.repeats, args.seed, threads=args.threads)
        for ds in summary.datasets:
            for m in summary.metrics:
                counts = summary.verdict_counts[ds][m]
                writer.writerow([
                    scenario.value, ds, m, summary.frequency(m, ds),
                    counts[IMPROVED] / args.repeats, counts[NEGLIGIBLE] / args.repeats,
                ])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
