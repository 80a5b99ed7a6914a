"""Render the activity map of a marked point as a PGM image.

    python3 scripts/render_activity.py --family "z^2 + t" --point 0 \
        --grid=-2.5,-1.5,1,1.5,512,512 --cap 256 --out mandelbrot.pgm
"""

import argparse
import time

from heightlab.bifurcation import ParamGrid, activity_map
from heightlab.cli import activity_pixels, pgm_bytes
from heightlab.parser import parse_family, parse_point


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--family", default="z^2 + t")
    ap.add_argument("--point", default="0")
    ap.add_argument("--grid", default="-2.5,-1.5,1,1.5,512,512")
    ap.add_argument("--cap", type=int, default=256)
    ap.add_argument("--threshold", type=float, default=1e12)
    ap.add_argument("--metric", choices=("affine", "spherical"), default="affine")
    ap.add_argument("--workers", type=int, default=8)
    ap.add_argument("--out", default="activity.pgm")
    args = ap.parse_args()

    grid = ParamGrid.parse(args.grid)
    start = time.perf_counter()
    amap = activity_map(
        parse_family(args.family), parse_point(args.point), grid, args.cap, args.threshold,
        metric=args.metric, workers=args.workers,
    )
    with open(args.out, "wb") as fh:
        fh.write(pgm_bytes(activity_pixels(amap.values, args.cap)))
    print(f"{grid.width}x{grid.height} in {time.perf_counter() - start:.1f} s; "
          f"active {int(amap.active.sum())} px, nan {amap.nan_cells}; wrote {args.out}")


if __name__ == "__main__":
    main()
