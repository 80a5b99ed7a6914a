"""Distance from active pixels to the nearest preperiodic parameter, per pair.

A shrinking median is the desk-scale shadow of preperiodic parameters
accumulating on the bifurcation locus.
"""

import argparse

from heightlab.bifurcation import ParamGrid, density_experiment
from heightlab.parser import parse_family, parse_point


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="z^2 + t")
    ap.add_argument("--point", default="0")
    ap.add_argument("--grid", default="-2.5,-1.5,1,1.5,256,256")
    ap.add_argument("--pairs", default="4:0,6:0,8:0,10:0,12:0")
    ap.add_argument("--cap", type=int, default=256)
    ap.add_argument("--workers", type=int, default=8)
    args = ap.parse_args()

    pairs = [tuple(int(x) for x in p.split(":")) for p in args.pairs.split(",")]
    rep = density_experiment(
        parse_family(args.family), parse_point(args.point), ParamGrid.parse(args.grid), pairs,
        cap=args.cap, workers=args.workers,
    )
    print(f"active pixels: {rep.active_pixels}")
    print(f"{'n':>3} {'m':>3} {'deg E':>6} {'verified':>9} {'in grid':>8} {'median dist':>12}")
    for e in rep.entries:
        if e.identically_preperiodic:
            print(f"{e.n:>3} {e.m:>3}  {e.note}")
            continue
        print(f"{e.n:>3} {e.m:>3} {e.degree:>6} {e.verified:>9} {e.fraction_in_grid:>8.3f} {e.median_distance:>12.6f}")
    print(f"nonincreasing: {rep.nonincreasing}")


if __name__ == "__main__":
    main()
