"""Standard against modified RUS scheduling on the toric code."""

import argparse

from fusionqldpc import experiments as ex
from fusionqldpc.codes import named_code


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=int, default=5)
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--losses", default="0.02,0.025,0.03,0.035,0.04")
    ap.add_argument("--trials", type=int, default=ex.DESK_TRIALS)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ctx = ex.context(named_code(f"toric{args.L}"))
    print("loss standard modified")
    for i, loss in enumerate(float(x) for x in args.losses.split(",")):
        std = ex.rus_point(ctx, 1 - loss, args.N, args.trials, args.seed, 2 * i, strategy="standard")
        mod = ex.rus_point(ctx, 1 - loss, args.N, args.trials, args.seed, 2 * i + 1, strategy="modified")
        print(f"{loss:.3f} {std.p_bar:.4f} {mod.p_bar:.4f}")


if __name__ == "__main__":
    main()
