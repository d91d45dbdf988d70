"""Low- and high-SNR parameters of the analytic spectral-efficiency curves.

For each formula and load prints the numeric minimum energy per bit (dB),
wideband slope S0, high-SNR slope S_inf and whether the slope estimate has
converged.

Usage: python scripts/asymptotic_parameters.py [--betas 0.5 1 2]
"""

import argparse

from thspeff import capacity as cap

CURVES = [("c_opt_th_ns1", None), ("c_opt_ds", None), ("sumf_th_knownS", 1),
          ("sumf_th_knownS", 2), ("sumf_ds", None), ("mmse_ds", None), ("sumf_th_star", 1)]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--betas", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    args = parser.parse_args()
    print(f"{'formula':<16} {'Ns':>3} {'beta':>5} {'eta_min dB':>10} {'S0':>8} {'S_inf':>8} conv")
    for name, Ns in CURVES:
        for beta in args.betas:
            p = cap.asymptotics(name, beta, Ns)
            print(f"{name:<16} {Ns or '-':>3} {beta:5.2f} {p.eta_min_db:10.4f} {p.S0:8.4f} "
                  f"{p.S_inf:8.4f} {p.converged}")


if __name__ == "__main__":
    main()
