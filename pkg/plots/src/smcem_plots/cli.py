"""Command-line figure rendering.

    smcem-plot --kind boxplot --in results/final.csv --param sigma_v2 \
               --truth 30 --out fig1.pdf
    smcem-plot --kind trace --in results/trace.csv --out traces.pdf
"""

from __future__ import annotations

import argparse
import sys

from .render import PlotError, PlotSpec, render


def build_parser():
    parser = argparse.ArgumentParser(prog="smcem-plot")
    parser.add_argument("--kind", required=True, choices=("boxplot", "trace"))
    parser.add_argument("--in", dest="csv_path", required=True,
                        help="trace.csv or final.csv from an experiment run")
    parser.add_argument("--param", help="parameter to plot (required when the "
                        "file holds several and --kind is boxplot)")
    parser.add_argument("--truth", type=float, help="true value overlay")
    parser.add_argument("--out", required=True, help="output image path "
                        "(.pdf/.svg/.png, vector preferred)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(csv_path=args.csv_path, kind=args.kind,
                    parameter=args.param, truth=args.truth, out_path=args.out)
    try:
        path = render(spec)
    except PlotError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
