"""S4 detection frequency as a function of sample size.

    python scripts/sample_size_sweep.py --target arctan --sizes 100 150 300 500 1000 2000
"""

import argparse
import csv
import sys

from uqcal.analysis import detection_study
from uqcal.synth import SYNTHETIC_TARGETS, Scenario, synth_target


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--target", choices=sorted(SYNTHETIC_TARGETS), default="arctan")
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 150, 300, 500, 1000, 2000])
    parser.add_argument("--scenario", default="s4")
    parser.add_argument("--repeats", type=int, default=100)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    scenario = Scenario.parse(args.scenario)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    header_done = False
    for n in args.sizes:
        y = synth_target(args.target, n, args.seed)
        summary = detection_study({args.target: y}, scenario, args.repeats, args.seed)
        if not header_done:
            writer.writerow(["n", *summary.metrics])
            header_done = True
        writer.writerow([n, *(summary.frequency(m) for m in summary.metrics)])


if __name__ == "__main__":
    main()
