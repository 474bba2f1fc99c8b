"""Batch figure scripts for Bayesian-optimization benchmark outputs.

Reads the experiment harness's CSV results (or their JSON summaries) and
renders regret curves with standard-error bands, plus the heatmap of the
moment-matching approximation study. Inputs are never modified.
"""

from .regret import PlotSpec, load_summary, plot_regret
from .heatmap import plot_approx_heatmap

__all__ = ["PlotSpec", "load_summary", "plot_regret", "plot_approx_heatmap"]
__version__ = "0.1.0"
