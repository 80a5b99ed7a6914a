"""Sup-norm increments of G_n on an annulus around a degenerate parameter.

For each lift the ratio sup|G_(n+1) - G_n| / sup|G_n - G_(n-1)| is printed;
the geometric-series bound predicts values near 1/d.
"""

import argparse

from heightlab.degeneration import AnnulusSpec, MarkedLift, convergence_ratios, escape_grid
from heightlab.parser import parse_family, parse_point


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="(z^2 - t)^2 / (4*z*(z-1)*(z-t))")
    ap.add_argument("--lifts", default="2:1,3:1,t+2:1,t+2:-2", help="comma list of x:y lift coordinates")
    ap.add_argument("--annulus", default="0.1,0.5")
    ap.add_argument("--samples", type=int, default=64)
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--workers", type=int, default=8)
    args = ap.parse_args()

    F = parse_family(args.family)
    r_in, r_out = (float(x) for x in args.annulus.split(","))
    spec = AnnulusSpec(r_in, r_out, args.samples, args.samples)
    lo, hi = 1 / F.d - 0.2, 1 / F.d + 0.2
    for item in args.lifts.split(","):
        x, y = (parse_point(s) for s in item.split(":"))
        A = MarkedLift(x.a1 * y.a2, y.a1 * x.a2)
        g = escape_grid(F, A, spec, args.N, workers=args.workers)
        ratios = convergence_ratios(g, 3, args.N - 1)
        ok = all(lo <= r <= hi for r in ratios.values())
        sups = " ".join(f"{s:.2e}" for s in g.sup_increments())
        shown = " ".join(f"{n}:{r:.3f}" for n, r in ratios.items())
        print(f"A = ({item})  sups [{sups}]")
        print(f"    ratios {shown}  within [{lo:.2f}, {hi:.2f}]: {ok}  nan cells: {g.nan_cells}")


if __name__ == "__main__":
    main()
