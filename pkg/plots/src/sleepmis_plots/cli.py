"""CLI: plot --csv <path> --kind <kind> --out <image>."""
from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, RenderError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sleepmis-plot",
        description="Render aggregate figures from a sleepmis experiment CSV.",
    )
    parser.add_argument("--csv", required=True, help="experiment CSV path")
    parser.add_argument("--kind", required=True, help=f"one of {', '.join(sorted(KINDS))}")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--algo", default=None, help="keep only this algorithm")
    parser.add_argument("--family", default=None, help="keep only this graph family")
    args = parser.parse_args(argv)
    try:
        image, agg = render(FigureSpec(args.csv, args.kind, args.out, args.algo, args.family))
    except (RenderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {image} and {agg}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
