#!/usr/bin/env python3
"""Finite-ring vs infinite-chain fidelity of pair states over lambda.

Prints the minimum fidelity per separation and where it occurs, plus the
values at the factorization field.  ``--sizes`` adds a nearest-neighbour
finite-size trend at one coupling.

    python3 scripts/fidelity_scan.py --n 10 --gamma 0.4,0.8
    python3 scripts/fidelity_scan.py --gamma 0.4 --sizes 6,8,10,12 --at 1.05
"""

import argparse

import numpy as np

from xycorr import analysis, thermo


def scan(n, gamma, lambdas, temperature=0.0):
    rs = list(range(1, n // 2 + 1))
    return rs, analysis.compare_finite_infinite(n, gamma, temperature, rs, lambdas)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--gamma", default="0.4,0.8")
    ap.add_argument("--T", type=float, default=0.0, help="infinite-chain temperature")
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--sizes", help="comma-separated ring sizes for a nearest-neighbour trend")
    ap.add_argument("--at", type=float, default=1.05, help="coupling for the size trend")
    args = ap.parse_args()

    lams = np.round(np.arange(0, 3 + args.step / 2, args.step), 10)
    for g in (float(x) for x in args.gamma.split(",")):
        if args.sizes:
            for n in (int(x) for x in args.sizes.split(",")):
                f = analysis.compare_finite_infinite(n, g, args.T, 1, [args.at])[0]
                print(f"gamma={g} N={n:2d} lambda={args.at}: F(r=1) = {f:.6f}")
            continue
        rs, f = scan(args.n, g, lams, args.T)
        print(f"gamma={g} N={args.n} T={args.T}")
        for r, row in zip(rs, f):
            i = int(np.argmin(row))
            print(f"  r={r}: min F = {row[i]:.6f} at lambda={lams[i]:.2f}")
        try:
            lf = thermo.factorization_field(g)
        except ValueError:
            continue
        at_f = analysis.compare_finite_infinite(args.n, g, args.T, rs, [lf])[:, 0]
        print(f"  at lambda_f={lf:.5f}: " + ", ".join(f"{v:.7f}" for v in at_f))


if __name__ == "__main__":
    main()
