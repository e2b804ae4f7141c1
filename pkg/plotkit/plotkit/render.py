"""Standalone renderer: ``python3 -m plotkit.render --kind ... --in ... --out ...``."""

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaMismatchError, render


def build_parser():
    parser = argparse.ArgumentParser(prog="plotkit-render", description=__doc__)
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        help="input CSV (repeatable)")
    parser.add_argument("--out", required=True,
                        help="output stem or .png/.svg path; both formats are written")
    parser.add_argument("--xscale", default="log", choices=["linear", "log"])
    parser.add_argument("--yscale", default="log", choices=["linear", "log"])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(inputs=tuple(args.inputs), kind=args.kind, out=args.out,
                      xscale=args.xscale, yscale=args.yscale)
    try:
        png, svg = render(spec)
    except SchemaMismatchError as err:
        print(f"schema mismatch: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"input not found: {err}", file=sys.stderr)
        return 2
    print(f"wrote {png} and {svg}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
