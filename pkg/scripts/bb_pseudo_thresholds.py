"""Error-only and erasure-only pseudo-thresholds for the four BB codes."""

import argparse
from pathlib import Path

from fusionqldpc import experiments as ex
from fusionqldpc.codes import named_code

REFERENCE = {"bb72": (0.00147, 0.0807), "bb90": (0.00158, 0.0841), "bb108": (0.00176, 0.0853), "bb144": (0.00181, 0.0870)}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--codes", default="bb72,bb144")
    ap.add_argument("--trials", type=int, default=ex.DESK_TRIALS)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--criterion", default="flip_or_lost", choices=ex.FAILURE_CRITERIA)
    ap.add_argument("--growth", default="invalid", choices=("invalid", "all"))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--output", default="results/bb_pseudo_thresholds.json")
    args = ap.parse_args()

    records = []
    for name in args.codes.split(","):
        code = named_code(name)
        for axis, ref in zip(("error-only", "erasure-only"), REFERENCE[name]):
            res = ex.pseudo_threshold(code, None, axis, args.trials, args.seed,
                                      criterion=args.criterion, workers=args.workers, growth=args.growth)
            lo, hi = res.crossing_ci
            print(f"{name} {axis}: {100 * res.crossing:.3f}% (CI {100 * lo:.3f}-{100 * hi:.3f}) reference {100 * ref:.3f}%")
            records.append(res.record() | {"reference": ref, "ci": [lo, hi]})
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    ex.write_json(records, args.output)


if __name__ == "__main__":
    main()
