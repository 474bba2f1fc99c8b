"""Heatmap of the moment-matching approximation study."""

import csv

import numpy as np


def _load_grid(path: str):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError("empty approximation-study CSV")
    needed = {"noise_ratio", "quantile", "ratio"}
    missing = needed - set(rows[0])
    if missing:
        raise ValueError(f"input CSV is missing columns: {', '.join(sorted(missing))}")
    ratios = sorted({float(r["noise_ratio"]) for r in rows})
    quants = sorted({float(r["quantile"]) for r in rows})
    grid = np.full((len(quants), len(ratios)), np.nan)
    for r in rows:
        i = quants.index(float(r["quantile"]))
        j = ratios.index(float(r["noise_ratio"]))
        grid[i, j] = float(r["ratio"])
    if np.any(np.isnan(grid)):
        raise ValueError("approximation-study CSV is not a full (noise ratio x quantile) grid")
    return np.array(ratios), np.array(quants), grid


def plot_approx_heatmap(input_path: str, output_path: str, dpi: int = 150):
    """Fraction of the truncation entropy reduction captured by moment
    matching, over (noise-variance ratio, retained-mass quantile)."""
    import matplotlib.pyplot as plt

    ratios, quants, grid = _load_grid(input_path)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    mesh = ax.pcolormesh(ratios, quants, grid, shading="nearest", cmap="viridis")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("noise variance / total variance")
    ax.set_ylabel("truncation quantile (retained mass)")
    fig.colorbar(mesh, ax=ax, label="moment-matched / MC entropy reduction")
    fig.tight_layout()
    fig.savefig(output_path, dpi=dpi)
    return fig
