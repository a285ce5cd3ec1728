"""Inner-product and marginal queries answered through a private CountDistinct mechanism.

For each budget, reports the mean batch error next to the mechanism's own
l_inf error on the constructed stream.  Batch error stays within 2 alpha for
inner products and alpha / n for marginals.

    python scripts/attack_demo.py --n 32 --k 8 --d 8 --trials 20
"""

import argparse

import numpy as np

from turnstile_dp.harness import runner, trial_seeds
from turnstile_dp.noise import NoiseSource
from turnstile_dp.reductions import inner_products_via_mechanism, marginals_via_mechanism


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--rhos", default="0.1,1,10")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    print("problem,rho,mean_batch_error,mean_trace_error,bound_ok")
    for rho in (float(r) for r in args.rhos.split(",")):
        for problem in ("inner-product", "marginals"):
            batch, trace, ok = [], [], True
            for trial in range(args.trials):
                data_seq, mech_seq = trial_seeds(args.seed, trial)
                rng = np.random.default_rng(data_seq)
                if problem == "inner-product":
                    run = runner("bounded", rho, 2 * args.k, NoiseSource(mech_seq))
                    res = inner_products_via_mechanism(
                        rng.integers(0, 2, args.n), rng.integers(0, 2, (args.k, args.n)), run)
                    limit = 2 * res.trace_error
                else:
                    run = runner("bounded", rho, 2 * args.d, NoiseSource(mech_seq))
                    res = marginals_via_mechanism(rng.integers(0, 2, (args.n, args.d)), run)
                    limit = res.trace_error / args.n
                batch.append(res.abs_error.mean())
                trace.append(res.trace_error)
                ok &= bool(res.abs_error.max() <= limit + 1e-9)
            print(f"{problem},{rho:g},{np.mean(batch):.4g},{np.mean(trace):.4g},{int(ok)}")


if __name__ == "__main__":
    main()
