"""Logical error rate along the error-only and erasure-only lines for the BB codes."""

import argparse
import math
from pathlib import Path

from fusionqldpc import experiments as ex
from fusionqldpc.cli import plot_csv
from fusionqldpc.codes import named_code


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--codes", default="bb72,bb90,bb108,bb144")
    ap.add_argument("--trials", type=int, default=ex.DESK_TRIALS)
    ap.add_argument("--points", type=int, default=11)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--output", default="results/line_sweeps")
    args = ap.parse_args()

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    xs = [i / (args.points - 1) for i in range(args.points)]
    for label, theta, field in (("error", 0.0, "p_e"), ("erasure", math.pi / 2, "p_l")):
        points = []
        for name in args.codes.split(","):
            points += ex.sweep_line(named_code(name), None, theta, xs, args.trials, args.seed, workers=args.workers)
            print(f"{label} {name} done")
        csv_path = out / f"{label}_only.csv"
        ex.write_csv(points, csv_path)
        # every BB code here has k = 12 or 8; overlay the k = 12 reference
        plot_csv(csv_path, out / f"{label}_only.svg", field, 12)


if __name__ == "__main__":
    main()
