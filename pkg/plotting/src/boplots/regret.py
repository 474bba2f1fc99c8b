"""Regret-curve figures from harness results.

Accepts either the summarized JSON (one record per task/acquisition/
iteration with mean and standard error of log regret) or a raw results CSV,
which is summarized in-process using the same floor convention the harness
publishes in its summary metadata.
"""

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

RESULT_COLUMNS = ["task", "acq", "seed", "iteration", "branch", "x", "y",
                  "simple_regret", "inference_regret", "acq_time_ms"]
REGRET_FLOOR = 1e-10
METRICS = ("simple", "inference", "accuracy")


@dataclass(frozen=True)
class PlotSpec:
    input_path: str
    output_path: str
    metric: str = "inference"
    y_scale: str = "log"
    band_se: float = 2.0
    dpi: int = 150

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.y_scale not in ("log", "linear"):
            raise ValueError(f"y_scale must be 'log' or 'linear', got {self.y_scale!r}")


def _summarize_csv(path: str) -> dict:
    """Raw results CSV to the summary structure (mean/SE of log regret)."""
    groups = defaultdict(lambda: {"simple": [], "inference": []})
    init_len: dict[str, int] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in RESULT_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"input CSV is missing columns: {', '.join(missing)}")
        for row in reader:
            task, acq, it = row["task"], row["acq"], int(row["iteration"])
            if row["branch"] == "init":
                init_len[task] = max(init_len.get(task, 0), it + 1)
            for metric in ("simple", "inference"):
                val = max(float(row[f"{metric}_regret"]), REGRET_FLOOR)
                groups[(task, acq, it)][metric].append(math.log(val))
    out = []
    for (task, acq, it) in sorted(groups):
        rec = {"task": task, "acq": acq, "iteration": it}
        for metric in ("simple", "inference"):
            vals = np.asarray(groups[(task, acq, it)][metric])
            rec[f"mean_log_{metric}"] = float(vals.mean())
            rec[f"se_log_{metric}"] = (
                float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
            )
        out.append(rec)
    return {"metadata": {"regret_floor": REGRET_FLOOR, "init_len": init_len}, "groups": out}


def load_summary(path: str) -> dict:
    if path.endswith(".json"):
        with open(path) as fh:
            return json.load(fh)
    return _summarize_csv(path)


def plot_regret(spec: PlotSpec):
    """Render one curve per acquisition with a +-k*SE band.

    Returns the matplotlib figure (also written to ``spec.output_path``).
    A dashed vertical line marks the end of the initial design.
    """
    import matplotlib.pyplot as plt

    summary = load_summary(spec.input_path)
    mean_col = f"mean_log_{spec.metric}"
    se_col = f"se_log_{spec.metric}"
    groups = summary["groups"]
    if not groups:
        raise ValueError("no data groups in input")
    missing = [c for c in (mean_col, se_col) if c not in groups[0]]
    if missing:
        raise ValueError(f"input has no columns: {', '.join(missing)}")

    tasks = sorted({g["task"] for g in groups})
    init_len = summary.get("metadata", {}).get("init_len", {})
    fig, axes = plt.subplots(
        len(tasks), 1, figsize=(7.0, 4.0 * len(tasks)), squeeze=False, sharex=False
    )
    for ax, task in zip(axes[:, 0], tasks):
        by_acq = defaultdict(list)
        for g in groups:
            if g["task"] == task:
                by_acq[g["acq"]].append((g["iteration"], g[mean_col], g[se_col]))
        for acq_name in sorted(by_acq):
            rows = sorted(by_acq[acq_name])
            it = np.array([r[0] for r in rows])
            mean = np.array([r[1] for r in rows])
            half = spec.band_se * np.array([r[2] for r in rows])
            if spec.y_scale == "log":
                ax.plot(it, np.exp(mean), label=acq_name)
                ax.fill_between(it, np.exp(mean - half), np.exp(mean + half), alpha=0.25)
                ax.set_yscale("log")
                ax.set_ylabel(f"{spec.metric} regret")
            else:
                ax.plot(it, mean, label=acq_name)
                ax.fill_between(it, mean - half, mean + half, alpha=0.25)
                ax.set_ylabel(f"mean log {spec.metric} regret")
        if task in init_len:
            ax.axvline(init_len[task] - 0.5, linestyle="--", color="gray", linewidth=1)
        ax.set_title(task)
        ax.set_xlabel("iteration")
        ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi)
    return fig
