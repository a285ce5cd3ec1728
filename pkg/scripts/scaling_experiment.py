"""Median and p95 l_inf error against the flippancy of adversarial-flip streams.

Runs the adaptive mechanism (no bound given) and the bounded mechanism told
the true flippancy, and writes one CSV row per (mechanism, w).

    python scripts/scaling_experiment.py --T 4096 --trials 50 --out scaling.csv
"""

import argparse
import sys

import numpy as np

from turnstile_dp.harness import bench_errors, to_csv


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--T", type=int, default=4096)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--w-grid", default="2,8,32,128")
    p.add_argument("--mechanisms", default="adaptive,bounded,hybrid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    args = p.parse_args(argv)

    rows = []
    for mech in args.mechanisms.split(","):
        for w in (int(v) for v in args.w_grid.split(",")):
            errs = bench_errors(mech, w, args.trials, args.rho, args.T, args.seed, jobs=args.jobs)
            rows.append((mech, w, args.trials, args.rho, args.T,
                         np.median(errs), np.percentile(errs, 95)))
            print(f"{mech:>9} w={w:<4} median={rows[-1][5]:.1f}", file=sys.stderr)
    text = to_csv(["mechanism", "w", "trials", "rho", "T", "median_linf", "p95_linf"], rows)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
