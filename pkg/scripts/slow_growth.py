"""m(r) = max_{|t|=r} |G_N(t)| / |log r| on shrinking circles.

Reports the trend only; whether G extends continuously to the degenerate
parameter is left open.
"""

import argparse

from heightlab.degeneration import MarkedLift, slow_growth_diagnostic
from heightlab.parser import parse_family, parse_point


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="(z^2 - t)^2 / (4*z*(z-1)*(z-t))")
    ap.add_argument("--lift", default="2:1")
    ap.add_argument("--radii", default="1e-1,1e-2,1e-3,1e-4,1e-5,1e-6")
    ap.add_argument("--N", type=int, default=8)
    args = ap.parse_args()

    x, y = (parse_point(s) for s in args.lift.split(":"))
    rep = slow_growth_diagnostic(
        parse_family(args.family), MarkedLift(x.a1 * y.a2, y.a1 * x.a2),
        [float(r) for r in args.radii.split(",")], args.N,
    )
    for r, m in zip(rep.radii, rep.m):
        print(f"r = {r:8.1e}   m(r) = {m:.6f}")
    print(f"nonincreasing within 10%: {rep.nonincreasing}")


if __name__ == "__main__":
    main()
