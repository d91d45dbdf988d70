"""Normalized rank of sparse signature matrices against its limits.

Prints a table of the Monte Carlo rank for one and two pulses per symbol next
to ``1 - exp(-beta)`` and the two-pulse bound ``min(beta, 1 - exp(-2 beta))``.

Usage: python scripts/rank_law.py [--n 50] [--trials 500] [--seed 0]
"""

import argparse
import math

import numpy as np

from thspeff import montecarlo as mc
from thspeff.ensembles import EnsembleSpec
from thspeff.laws import rank_upper_bound


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=50)
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    grid = tuple(np.round(np.arange(0.2, 2.01, 0.2), 10))
    res = {Ns: mc.run(mc.Experiment(EnsembleSpec.th(args.n, args.n, Ns), "beta", grid,
                                    args.trials, {"rank"}, seed=args.seed))["rank"]
           for Ns in (1, 2)}
    print(f"{'beta':>5} {'rank Ns=1':>10} {'1-e^-b':>8} {'rank Ns=2':>10} {'bound':>8}")
    for i, b in enumerate(grid):
        print(f"{b:5.2f} {res[1].mean[i]:10.4f} {-math.expm1(-b):8.4f} "
              f"{res[2].mean[i]:10.4f} {float(rank_upper_bound(b, 2)):8.4f}")


if __name__ == "__main__":
    main()
