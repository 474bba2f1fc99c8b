"""Experiment harness: sweeps of (task x acquisition x seed) runs to CSV,
the moment-matching approximation study, and log-regret summaries.

Result rows are merged in (task, acquisition, seed) order whatever the
execution order, so parallel and serial runs of one config produce
identical files apart from the timing column.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from . import gaussmath
from .engine import BOConfig, run_bo
from .tasks import task_from_descriptor

CSV_HEADER = ["task", "acq", "seed", "iteration", "branch", "x", "y",
              "simple_regret", "inference_regret", "acq_time_ms"]
REGRET_FLOOR = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    tasks: tuple  # of descriptor dicts
    acquisitions: tuple
    seeds: tuple
    bo_overrides: dict = field(default_factory=dict)
    workers: int | None = None

    def __post_init__(self):
        if not self.tasks or not self.acquisitions or not self.seeds:
            raise ValueError("config needs at least one task, acquisition and seed")

    @staticmethod
    def from_dict(cfg: dict) -> "ExperimentConfig":
        seeds = cfg["seeds"]
        if isinstance(seeds, dict):
            seeds = range(seeds.get("start", 0), seeds["stop"])
        return ExperimentConfig(
            tasks=tuple(cfg["tasks"]),
            acquisitions=tuple(a.lower() for a in cfg["acquisitions"]),
            seeds=tuple(int(s) for s in seeds),
            bo_overrides=dict(cfg.get("bo", {})),
            workers=cfg.get("workers"),
        )

    @staticmethod
    def from_json(path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return ExperimentConfig.from_dict(json.load(fh))


def _run_one(args):
    task_desc, acq, seed, overrides = args
    task = task_from_descriptor(task_desc, run_seed=seed)
    config = BOConfig(acquisition=acq, **overrides)
    trace = run_bo(task, config, seed)
    rows = []
    for row in trace.rows:
        rows.append([
            trace.task, acq, str(seed), str(row.iteration), row.branch,
            ";".join(repr(v) for v in row.x), repr(row.y),
            repr(row.simple_regret), repr(row.inference_regret),
            repr(row.acq_time_ms),
        ])
    return rows


def default_workers() -> int:
    env = os.environ.get("BO_WORKERS", "").strip()
    if env:
        return max(1, int(env))
    return 1


def run_experiment(config: ExperimentConfig, out_path: str) -> int:
    """Execute all runs, write CSV (and a failure manifest on errors).

    Returns 0 on full success, 1 if any run failed; completed rows are
    flushed either way.
    """
    specs = [
        (task, acq, seed, config.bo_overrides)
        for task in config.tasks
        for acq in config.acquisitions
        for seed in config.seeds
    ]
    workers = config.workers or default_workers()
    results: dict[int, list] = {}
    failures = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(_run_one, spec) for i, spec in enumerate(specs)}
            for i, fut in futures.items():
                try:
                    results[i] = fut.result()
                except Exception as exc:
                    failures.append((i, exc))
    else:
        for i, spec in enumerate(specs):
            try:
                results[i] = _run_one(spec)
            except Exception as exc:
                failures.append((i, exc))

    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for i in range(len(specs)):
            for row in results.get(i, []):
                writer.writerow(row)

    if failures:
        manifest = {
            "completed": len(results),
            "failed": [
                {
                    "task": specs[i][0].get("name"),
                    "acq": specs[i][1],
                    "seed": specs[i][2],
                    "error": f"{type(exc).__name__}: {exc}",
                }
                for i, exc in failures
            ],
        }
        with open(out_path + ".failures.json", "w") as fh:
            json.dump(manifest, fh, indent=2)
        return 1
    return 0


def approx_study(noise_ratios, quantiles, n_mc: int, seed: int, out_path: str) -> None:
    """Moment-matched vs Monte Carlo entropy reduction from truncation.

    One row per (noise-variance ratio, retained-mass quantile) cell on a
    unit-total-variance Gaussian; the ratio column divides the
    moment-matched reduction by the MC one.
    """
    noise_ratios = [float(r) for r in noise_ratios]
    quantiles = [float(q) for q in quantiles]
    if any(not 0.0 < r < 1.0 for r in noise_ratios):
        raise ValueError("noise ratios must lie in (0, 1)")
    if any(not 0.0 < q < 1.0 for q in quantiles):
        raise ValueError("quantiles must lie in (0, 1)")
    h_total = gaussmath.gaussian_entropy(1.0)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["noise_ratio", "quantile", "mm_reduction", "mc_reduction", "mc_std_err", "ratio"])
        for i, r in enumerate(noise_ratios):
            for j, q in enumerate(quantiles):
                var_noise, var_f = r, 1.0 - r
                upper = math.sqrt(var_f) * float(ndtri(q))
                tm = gaussmath.truncated_moments(0.0, var_f, upper)
                mm_red = h_total - gaussmath.gaussian_entropy(var_noise + tm.variance)
                mc_ent, std_err = gaussmath.mc_truncation_entropy(
                    0.0, var_f, var_noise, upper, n_mc, (seed << 10) ^ (i * 97 + j)
                )
                mc_red = h_total - mc_ent
                ratio = mm_red / mc_red if mc_red != 0.0 else math.inf
                writer.writerow([repr(r), repr(q), repr(mm_red), repr(mc_red), repr(std_err), repr(ratio)])


def read_rows(csv_path: str) -> list[dict]:
    rows = []
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append({
                    "task": row["task"],
                    "acq": row["acq"],
                    "seed": int(row["seed"]),
                    "iteration": int(row["iteration"]),
                    "branch": row["branch"],
                    "x": row["x"],
                    "y": float(row["y"]),
                    "simple_regret": float(row["simple_regret"]),
                    "inference_regret": float(row["inference_regret"]),
                    "acq_time_ms": float(row["acq_time_ms"]),
                })
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"malformed CSV row at line {lineno}: {exc}") from exc
    return rows


def summarize(csv_path: str, group_keys=("task", "acq", "iteration")) -> dict:
    """Per-group mean/median/standard error of log regrets (floored)."""
    rows = read_rows(csv_path)
    groups: dict[tuple, dict] = {}
    init_len: dict[str, int] = {}
    for row in rows:
        if row["branch"] == "init":
            init_len[row["task"]] = max(init_len.get(row["task"], 0), row["iteration"] + 1)
        key = tuple(row[k] for k in group_keys)
        groups.setdefault(key, {"simple": [], "inference": []})
        groups[key]["simple"].append(math.log(max(row["simple_regret"], REGRET_FLOOR)))
        groups[key]["inference"].append(math.log(max(row["inference_regret"], REGRET_FLOOR)))
    out_groups = []
    for key in sorted(groups):
        entry = dict(zip(group_keys, key))
        entry["n"] = len(groups[key]["simple"])
        for metric in ("simple", "inference"):
            vals = np.asarray(groups[key][metric])
            se = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
            entry[f"mean_log_{metric}"] = float(np.mean(vals))
            entry[f"median_log_{metric}"] = float(np.median(vals))
            entry[f"se_log_{metric}"] = se
        out_groups.append(entry)
    return {
        "metadata": {"regret_floor": REGRET_FLOOR, "group_keys": list(group_keys), "init_len": init_len},
        "groups": out_groups,
    }
