"""figures --csv <results.csv> --fig <2a|2b|2c|2d|3> --out <image>"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_IDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures", description=__doc__)
    parser.add_argument("--csv", required=True, help="path to a results.csv from a sweep")
    parser.add_argument("--fig", required=True, choices=FIGURE_IDS, help="figure id")
    parser.add_argument("--out", required=True, help="output image path (by extension: png, pdf, svg)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(FigureSpec(csv_path=args.csv, figure_id=args.fig, out_path=args.out))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
