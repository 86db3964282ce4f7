"""Photon-loss (pseudo-)threshold against the RUS repetition limit N."""

import argparse
from pathlib import Path

from fusionqldpc import experiments as ex
from fusionqldpc.codes import named_code


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", default="1,2,3,4,5,6,8,10")
    ap.add_argument("--trials", type=int, default=ex.DESK_TRIALS)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--strategy", default="modified", choices=("standard", "modified"))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--output", default="results/rus_vs_N")
    args = ap.parse_args()

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    Ns = [int(n) for n in args.N.split(",")]
    records = []
    family = [named_code(f"toric{L}") for L in (3, 5, 8)]
    for N in Ns:
        for code, kwargs in ((family, {"loss_range": (0.002, 0.06)}), (named_code("bb144"), {"loss_range": (0.002, 0.06)})):
            try:
                res = ex.rus_threshold_curve(code, None, [N], args.trials, args.seed, strategy=args.strategy,
                                             workers=args.workers, **kwargs)
            except ex.NoCrossingError as exc:
                print(f"N={N}: {exc}")
                continue
            for r in res:
                records.append(r.record() | {"N": N, "ci": list(r.crossing_ci)})
                print(f"N={N} {r.code}: {100 * r.crossing:.2f}%")
        ex.write_json(records, out / f"rus_{args.strategy}.json")


if __name__ == "__main__":
    main()
