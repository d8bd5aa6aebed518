#!/usr/bin/env python3
"""Full-scale discrimination study: percentage of synthetic datasets
classified as bessel under each generator, for n in {50, 100, 200, 500}.
Full scale is 1000 replications per cell (hours on a single core);
--replications 200 gives the desk-scale version."""

import argparse

from besselreg.simstudy import MCConfig, run_dbb_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", nargs="*", type=int,
                    default=[50, 100, 200, 500])
    ap.add_argument("--replications", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20260823)
    ap.add_argument("--threads", type=int, default=-1)
    args = ap.parse_args()

    print(f"{'n':>5} {'bessel generator':>18} {'beta generator':>16}")
    for n in args.sizes:
        bes = MCConfig(generator="bessel", n=n,
                       replications=args.replications,
                       master_seed=args.seed)
        bet = MCConfig(generator="beta", n=n,
                       replications=args.replications,
                       master_seed=args.seed)
        rates = run_dbb_study(bes, bet, n_jobs=args.threads)
        print(f"{n:>5} "
              f"{rates['bessel']['pct_bessel_selected']:>17.1f}% "
              f"{rates['beta']['pct_bessel_selected']:>15.1f}%")


if __name__ == "__main__":
    main()
