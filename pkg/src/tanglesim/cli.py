"""Command-line front end.

    tanglesim run --goal I --out results/
    tanglesim run --config battery.json --seeds 1,2,3 --out results/

Progress goes to stderr; data only to files.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from . import _kernels
from .engine import Timing
from .experiments import GOALS, load_battery_file, load_goal, run_plans, write_results


@dataclass(frozen=True)
class RunRequest:
    goal: str | None
    config_path: str | None
    output_dir: str
    seeds: tuple[int, ...] | None
    operating_time: float | None
    interval_d: float | None
    pow_i: float | None
    intake_n: int | None
    workers: int | None


def _seed_list(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--seeds expects a comma-separated integer list, got {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("--seeds list is empty")
    return seeds


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tanglesim",
                                     description="Tangle-style DAG ledger attack simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a goal preset or a custom battery file")
    run.add_argument("--goal", choices=GOALS, help="preset battery (I..IV)")
    run.add_argument("--config", dest="config_path", metavar="PATH",
                     help="custom battery file (JSON)")
    run.add_argument("--seeds", type=_seed_list, metavar="CSV-LIST",
                     help="seed override, e.g. 1,2,3")
    run.add_argument("--out", dest="output_dir", required=True, metavar="DIR",
                     help="output directory for CSV and JSON artifacts")
    run.add_argument("--operating-time", type=float, metavar="SECS")
    run.add_argument("--interval-d", type=float, metavar="SECS",
                     help="gap D between a node's transactions")
    run.add_argument("--pow-i", type=float, metavar="SECS", help="PoW delay I")
    run.add_argument("--intake-n", type=int, metavar="INT",
                     help="max deliveries per simulated second")
    run.add_argument("--workers", type=int, metavar="INT",
                     help="parallel run workers (default: all cores)")
    return parser


def parse_args(argv) -> RunRequest:
    """Validated run request, or SystemExit with a usage error."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if (ns.goal is None) == (ns.config_path is None):
        parser.error("exactly one of --goal and --config is required")
    return RunRequest(
        goal=ns.goal,
        config_path=ns.config_path,
        output_dir=ns.output_dir,
        seeds=ns.seeds,
        operating_time=ns.operating_time,
        interval_d=ns.interval_d,
        pow_i=ns.pow_i,
        intake_n=ns.intake_n,
        workers=ns.workers,
    )


def execute(request: RunRequest) -> int:
    """Load the battery, run it, write artifacts, print per-set summaries."""
    try:
        if request.goal is not None:
            battery = load_goal(request.goal)
        else:
            battery = load_battery_file(request.config_path)
    except (OSError, ValueError) as exc:
        print(f"tanglesim: {exc}", file=sys.stderr)
        return 2

    timing = None
    if any(v is not None for v in (request.interval_d, request.pow_i, request.intake_n)):
        base = Timing()
        timing = Timing(
            interval_d=request.interval_d if request.interval_d is not None else base.interval_d,
            pow_i=request.pow_i if request.pow_i is not None else base.pow_i,
            intake_n=request.intake_n if request.intake_n is not None else base.intake_n,
        )
    try:
        plans = battery.expand(seeds=request.seeds, timing=timing,
                               operating_time=request.operating_time)
        for plan in plans:
            plan.config.validate()
    except ValueError as exc:
        print(f"tanglesim: invalid configuration: {exc}", file=sys.stderr)
        return 2

    n_runs = sum(len(p.config.seeds) for p in plans)
    print(f"tanglesim: {len(plans)} configs x seeds = {n_runs} runs "
          f"({_kernels.BACKEND} kernels)", file=sys.stderr)
    try:
        results = run_plans(plans, workers=request.workers)
        paths = write_results(request.output_dir, battery.goal, results)
    except OSError as exc:
        print(f"tanglesim: {exc}", file=sys.stderr)
        return 1

    by_set = {}
    for r in results:
        by_set.setdefault(r.plan.set_index, []).append(r)
    for set_index in sorted(by_set):
        recs = by_set[set_index]
        total = sum(r.metrics.total_created for r in recs)
        conf_inv = sum(r.metrics.confirmed_invalid for r in recs)
        print(f"tanglesim: set {set_index}: {len(recs)} runs, "
              f"{total} transactions, {conf_inv} confirmed invalid", file=sys.stderr)
    print(f"tanglesim: wrote {len(paths)} files to {request.output_dir}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    return execute(parse_args(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    raise SystemExit(main())
