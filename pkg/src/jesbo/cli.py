"""Command-line experiment runner.

Subcommands: ``run`` (sweep a JSON config to CSV), ``approx-study``
(moment-matching approximation grid), ``summarize`` (CSV to JSON log-regret
summary), ``list-tasks``.
"""

import argparse
import json
import sys

from . import harness, tasks


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="jesbo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment sweep")
    p_run.add_argument("--config", required=True, help="JSON experiment config")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument("--workers", type=int, default=None,
                       help="parallel runs (default: BO_WORKERS env or 1)")

    p_apx = sub.add_parser("approx-study", help="moment-matching approximation study")
    p_apx.add_argument("--out", required=True)
    p_apx.add_argument("--noise-ratios", type=float, nargs="+",
                       default=[1e-3, 1e-2, 0.1, 0.5])
    p_apx.add_argument("--quantiles", type=float, nargs="+",
                       default=[1e-6, 1e-4, 1e-2, 0.5])
    p_apx.add_argument("--n-mc", type=int, default=200_000)
    p_apx.add_argument("--seed", type=int, default=0)

    p_sum = sub.add_parser("summarize", help="summarize a results CSV")
    p_sum.add_argument("--in", dest="inp", required=True)
    p_sum.add_argument("--out", required=True)

    sub.add_parser("list-tasks", help="list available task names")

    args = parser.parse_args(argv)
    if args.command == "run":
        config = harness.ExperimentConfig.from_json(args.config)
        if args.workers is not None:
            config = harness.ExperimentConfig(
                tasks=config.tasks, acquisitions=config.acquisitions,
                seeds=config.seeds, bo_overrides=config.bo_overrides,
                workers=args.workers,
            )
        code = harness.run_experiment(config, args.out)
        if code != 0:
            print(f"some runs failed; see {args.out}.failures.json", file=sys.stderr)
        return code
    if args.command == "approx-study":
        harness.approx_study(args.noise_ratios, args.quantiles, args.n_mc, args.seed, args.out)
        return 0
    if args.command == "summarize":
        summary = harness.summarize(args.inp)
        with open(args.out, "w") as fh:
            json.dump(summary, fh, indent=2)
        return 0
    if args.command == "list-tasks":
        for name in tasks.list_task_names():
            print(name)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
