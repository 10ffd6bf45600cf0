#!/usr/bin/env python3
"""Print k_r, h_r and q_r for a lacunary sequence given as a theta spec.

    python scripts/inspect_lacunary.py fact_even --r-max 10
    python scripts/inspect_lacunary.py ratio:6
"""
import argparse
from fractions import Fraction

from summaprob import diagnostics as dg
from summaprob.lacunary import RatioControlled, theta_from_spec


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("theta", help="pow2, pow:B, fact_even, fact_odd, ratio:JMAX, list:1,2,4")
    ap.add_argument("--r-max", type=int, default=12)
    args = ap.parse_args(argv)

    theta = theta_from_spec(args.theta)
    print(theta.describe())
    print(f"{'r':>3}  {'k_r':>22}  {'h_r':>22}  q_r")
    shown = 0
    for r in range(1, args.r_max + 1):
        try:
            k, h, q = theta.term(r), theta.h(r), theta.q(r)
        except Exception as exc:  # finite lists end
            print(f"stops at r={r}: {exc}")
            break
        print(f"{r:>3}  {k:>22}  {h:>22}  {q} (~{float(q):.6g})")
        shown = r
    if shown >= 2:
        print(f"min q_r over [1, {shown}] = {dg.liminf_q(theta, 1, shown)}")
    if isinstance(theta, RatioControlled):
        for j, rj, a, b in theta.pairs():
            print(f"j={j}: r(j)={rj}  b_j/a_j = {float(Fraction(b, a)):.6f}")


if __name__ == "__main__":
    main()
