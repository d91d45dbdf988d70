"""Write the CSV data of every figure into one directory.

Usage: python scripts/reproduce_figures.py [OUT_DIR] [--quick]

``--quick`` lowers Monte Carlo trial counts so the run finishes in a few minutes.
"""

import argparse
import sys
import time

from thspeff import cli, figures

QUICK = ["--trials", "20"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", nargs="?", default="figures")
    parser.add_argument("--quick", action="store_true", help="reduced trial counts")
    parser.add_argument("--seed", default="0")
    args = parser.parse_args()
    status = 0
    for fig in figures.FIGURES:
        start = time.perf_counter()
        argv = ["figure", fig, "--out", args.out, "--seed", args.seed]
        if args.quick:
            argv += QUICK
        code = cli.main(argv)
        print(f"figure {fig}: exit {code} in {time.perf_counter() - start:.1f}s", file=sys.stderr)
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
