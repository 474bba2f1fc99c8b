"""Command-line entry points for the figure scripts."""

import argparse

import matplotlib

matplotlib.use("Agg")

from .heatmap import plot_approx_heatmap
from .regret import PlotSpec, plot_regret


def main_regret(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot-regret", description="regret curves with SE bands")
    parser.add_argument("--in", dest="inp", required=True, help="summary JSON or results CSV")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--metric", default="inference", choices=["simple", "inference", "accuracy"])
    parser.add_argument("--scale", default="log", choices=["log", "linear"])
    parser.add_argument("--band", type=float, default=2.0, help="band half-width in standard errors")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    plot_regret(PlotSpec(
        input_path=args.inp, output_path=args.out, metric=args.metric,
        y_scale=args.scale, band_se=args.band, dpi=args.dpi,
    ))
    return 0


def main_heatmap(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot-heatmap", description="approximation-study heatmap")
    parser.add_argument("--in", dest="inp", required=True, help="approximation-study CSV")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    plot_approx_heatmap(args.inp, args.out, dpi=args.dpi)
    return 0
