"""Preset experiment batteries and result aggregation.

The four goal batteries transcribe the published configuration table
(twelve testing sets).  `run_battery` executes every (config, seed)
pair deterministically; `aggregate` reduces records to per-config
statistics plus the trend figures the acceptance checks use.
"""

from __future__ import annotations

import csv
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .attacks import parse_strategy
from .engine import DEFAULT_SEEDS, ExperimentConfig, MetricsRecord, Timing, launch

GOALS = ("I", "II", "III", "IV")
STAR_STRATEGIES = ("ade", "abe", "abd")  # the table's "*" shorthand

_PCT = {0.1: "10%", 0.2: "20%", 0.3: "30%"}


@dataclass(frozen=True)
class BatteryRow:
    """One data row of the configuration table.

    `strategies` and `ratio_fs` are already expanded ("*" and the
    multi-percent cells); `table_strategy` / `table_ratio_f` keep the
    printed forms for the golden transcription.  `table_f` is the
    printed absolute malicious-node count where the table has one.
    """

    set_index: int
    row_index: int
    total_nodes: int
    ratio_fs: tuple[float, ...]
    strategies: tuple[str, ...]
    ratio_b: str
    table_strategy: str
    table_ratio_f: str | tuple[str, ...]
    table_f: int | None = None

    def table_row(self) -> dict:
        row = {
            "set": self.set_index,
            "row": self.row_index,
            "total_node": self.total_nodes,
        }
        if self.table_f is not None:
            row["f"] = self.table_f
        row["strategy"] = self.table_strategy
        row["ratio_b"] = self.ratio_b
        row["ratio_f"] = (list(self.table_ratio_f)
                          if isinstance(self.table_ratio_f, tuple) else self.table_ratio_f)
        return row


@dataclass(frozen=True)
class GoalBattery:
    goal: str
    rows: tuple[BatteryRow, ...]
    notes: tuple[str, ...] = ()

    def table_rows(self) -> list[dict]:
        return [r.table_row() for r in self.rows]

    def expand(self, seeds=None, timing: Timing | None = None,
               operating_time: float | None = None) -> list["PlannedRun"]:
        """Cartesian expansion into concrete configs, in table order."""
        plans = []
        for row in self.rows:
            for strat in row.strategies:
                for rf in row.ratio_fs:
                    cfg = ExperimentConfig(
                        total_nodes=row.total_nodes,
                        ratio_f=rf,
                        strategy=parse_strategy(strat, row.ratio_b),
                        operating_time=operating_time if operating_time is not None else 3000.0,
                        timing=timing if timing is not None else Timing(),
                        seeds=tuple(seeds) if seeds is not None else DEFAULT_SEEDS,
                    )
                    plans.append(PlannedRun(self.goal, row.set_index, row.row_index,
                                            strat, row.ratio_b, cfg))
        return plans


@dataclass(frozen=True)
class PlannedRun:
    goal: str
    set_index: int
    row_index: int
    strategy_spec: str
    ratio_spec: str
    config: ExperimentConfig


@dataclass(frozen=True)
class RunResult:
    plan: PlannedRun
    seed: int
    metrics: MetricsRecord


def _row(set_index, row_index, total_nodes, ratio_fs, strategies, ratio_b,
         table_strategy=None, table_ratio_f=None, table_f=None) -> BatteryRow:
    if table_strategy is None:
        table_strategy = strategies[0] if len(strategies) == 1 else "*"
    if table_ratio_f is None:
        pct = tuple(_PCT.get(rf, f"{rf * 100:g}%") for rf in ratio_fs)
        table_ratio_f = pct[0] if len(pct) == 1 else pct
    return BatteryRow(set_index, row_index, total_nodes, tuple(ratio_fs),
                      tuple(strategies), ratio_b, table_strategy, table_ratio_f, table_f)


def _goal_one() -> GoalBattery:
    rows = [
        _row(1, 1, 100, [0.2], ["bd"], "5:5"),
        _row(1, 2, 100, [0.2], ["be"], "5:5"),
        _row(2, 1, 100, [0.2], ["ade"], "4:3:3"),
        _row(2, 2, 100, [0.2], ["abe"], "4:3:3"),
        _row(2, 3, 100, [0.2], ["abd"], "4:3:3"),
        _row(3, 1, 100, [0.2], ["e"], "-"),
        _row(3, 2, 100, [0.2], ["abcd"], "4:2:2:2"),
        _row(3, 3, 100, [0.2], ["abdf"], "4:2:2:2"),
    ]
    notes = (
        "set 1 has a blank padding row in the published table; omitted",
        "set 3 strategy e has ratio '-': single behavior, degenerate ratio 10",
        "the Result I narrative mentions Ratio(F)=10% while the table gives 20%; "
        "the table value is used here (override ratio_f for the 10% variant)",
    )
    return GoalBattery("I", tuple(rows), notes)


def _goal_two() -> GoalBattery:
    ratios = ("8:1:1", "6:2:2", "4:3:3", "6:3:1", "6:1:3")
    rows = []
    for set_index, rf in zip((4, 5, 6), (0.1, 0.2, 0.3)):
        for i, rb in enumerate(ratios, start=1):
            rows.append(_row(set_index, i, 100, [rf], STAR_STRATEGIES, rb))
    return GoalBattery("II", tuple(rows))


def _goal_three() -> GoalBattery:
    f_cols = {
        7: ((20, 2), (50, 5), (100, 10), (200, 20)),
        8: ((20, 4), (50, 10), (100, 10), (200, 40)),
        9: ((20, 6), (50, 15), (100, 30), (200, 60)),
    }
    rows = []
    for set_index, rf in zip((7, 8, 9), (0.1, 0.2, 0.3)):
        for i, (total, f_col) in enumerate(f_cols[set_index], start=1):
            rows.append(_row(set_index, i, total, [rf], STAR_STRATEGIES, "6:2:2",
                             table_f=f_col))
    notes = (
        "set 8 row 3 prints F=10 for 100 nodes at 20%, which is arithmetically "
        "inconsistent; implemented as F=20 (ratio_f wins)",
        "the Ratio(B)=6:2:2 column comes from the goal description, not the table block",
    )
    return GoalBattery("III", tuple(rows), notes)


def _goal_four() -> GoalBattery:
    sweep = ("9:1", "8:2", "7:3", "6:4", "5:5", "4:6")
    rows = []
    for i, rb in enumerate(sweep, start=1):
        rows.append(_row(10, i, 100, [0.1], ["ac"], rb))
    for i, total in enumerate((20, 50, 100, 200), start=1):
        rows.append(_row(11, i, total, [0.1, 0.2, 0.3], ["ac"], "8:2"))
    for i, rb in enumerate(sweep, start=1):
        rows.append(_row(12, i, 100, [0.1, 0.2, 0.3], ["ac"], rb))
    notes = ("sets 11 and 12 fix the strategy to ac (stated in the set 10 block)",)
    return GoalBattery("IV", tuple(rows), notes)


_BUILDERS = {"I": _goal_one, "II": _goal_two, "III": _goal_three, "IV": _goal_four}


def load_goal(goal: str) -> GoalBattery:
    """The preset battery for one of the goals I..IV."""
    try:
        return _BUILDERS[goal]()
    except KeyError:
        raise ValueError(f"unknown goal {goal!r}; valid goals: {', '.join(GOALS)}") from None


# -- execution --------------------------------------------------------


def _execute(args) -> RunResult:
    plan, seed = args
    return RunResult(plan, seed, launch(plan.config, seed))


def run_plans(plans, workers: int | None = 1) -> list[RunResult]:
    """Execute every (plan, seed) pair; output order is config order then
    seed order regardless of parallelism."""
    jobs = [(plan, seed) for plan in plans for seed in plan.config.seeds]
    if not jobs:
        return []
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) == 1:
        return [_execute(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_execute, jobs, chunksize=1))


def run_battery(battery: GoalBattery, seeds=None, timing: Timing | None = None,
                operating_time: float | None = None, workers: int | None = 1) -> list[RunResult]:
    return run_plans(battery.expand(seeds=seeds, timing=timing,
                                    operating_time=operating_time), workers=workers)


# -- aggregation ------------------------------------------------------

_SCALAR_FIELDS = ("confirmed_invalid", "confirmed_valid", "abandoned_invalid",
                  "abandoned_valid", "total_created", "invalid_created", "valid_created",
                  "live", "invalid_over_total", "valid_over_total")


def _stats(values) -> dict:
    vals = [float(v) for v in values]
    return {
        "mean": statistics.fmean(vals),
        "min": min(vals),
        "max": max(vals),
        "std": statistics.pstdev(vals),
    }


def coefficient_of_variation(values) -> float:
    vals = [float(v) for v in values]
    mean = statistics.fmean(vals)
    if mean == 0:
        return 0.0 if all(v == 0 for v in vals) else math.inf
    return statistics.pstdev(vals) / abs(mean)


def _group_key(result: RunResult):
    p = result.plan
    return (p.goal, p.set_index, p.row_index, p.strategy_spec, p.ratio_spec,
            p.config.ratio_f, p.config.total_nodes)


def aggregate(results) -> dict:
    """Per-config statistics across seeds, plus trend figures.

    Order-insensitive: the output is sorted by config identity, and the
    per-group statistics are symmetric in the records.
    """
    results = list(results)
    if not results:
        raise ValueError("no records to aggregate")
    groups: dict[tuple, list[RunResult]] = {}
    for r in results:
        groups.setdefault(_group_key(r), []).append(r)

    per_config = []
    for key in sorted(groups):
        goal, set_index, row_index, strat, ratio_b, ratio_f, total_nodes = key
        recs = sorted(groups[key], key=lambda r: r.seed)
        entry = {
            "goal": goal,
            "set": set_index,
            "row": row_index,
            "strategy": strat,
            "ratio_b": ratio_b,
            "ratio_f": ratio_f,
            "total_nodes": total_nodes,
            "seeds": [r.seed for r in recs],
            "metrics": {f: _stats([getattr(r.metrics, f) for r in recs])
                        for f in _SCALAR_FIELDS},
        }
        times = [t for r in recs for t in r.metrics.confirm_times]
        entry["confirm_time"] = dict(_stats(times), count=len(times)) if times else {"count": 0}
        per_config.append(entry)

    return {"per_config": per_config, "trends": _trends(per_config)}


def _trends(per_config) -> dict:
    """Slope of confirmed_invalid vs ratio_f per (set, strategy, ratio_b)
    and CV of valid_over_total across ratio_b per (set, strategy)."""
    slopes = {}
    by_strategy: dict[tuple, list] = {}
    for e in per_config:
        by_strategy.setdefault((e["set"], e["strategy"], e["ratio_b"]), []).append(e)
    for (set_index, strat, rb), entries in sorted(by_strategy.items()):
        pts = sorted((e["ratio_f"], e["metrics"]["confirmed_invalid"]["mean"]) for e in entries)
        if len(pts) >= 2:
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            xbar = statistics.fmean(xs)
            ybar = statistics.fmean(ys)
            denom = sum((x - xbar) ** 2 for x in xs)
            slope = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / denom
            slopes[f"set{set_index}:{strat}:{rb}"] = slope

    cvs = {}
    by_ratio: dict[tuple, list] = {}
    for e in per_config:
        by_ratio.setdefault((e["set"], e["strategy"], e["ratio_f"], e["total_nodes"]), []).append(e)
    for (set_index, strat, rf, total), entries in sorted(by_ratio.items()):
        if len(entries) >= 2:
            vals = [e["metrics"]["valid_over_total"]["mean"] for e in entries]
            cvs[f"set{set_index}:{strat}:f={rf}:n={total}"] = coefficient_of_variation(vals)

    return {"confirmed_invalid_slope_vs_ratio_f": slopes,
            "valid_over_total_cv_across_ratio_b": cvs}


# -- artifacts --------------------------------------------------------

CSV_COLUMNS = ("goal", "set", "row", "total_nodes", "ratio_f", "strategy", "ratio_b",
               "seed", "confirmed_invalid", "confirmed_valid", "abandoned_invalid",
               "abandoned_valid", "total_created", "invalid_created", "valid_created",
               "live", "invalid_over_total", "valid_over_total",
               "confirm_time_count", "confirm_time_mean", "confirm_time_min",
               "confirm_time_max", "confirm_times")


def result_row(result: RunResult) -> dict:
    p, m = result.plan, result.metrics
    times = m.confirm_times
    return {
        "goal": p.goal,
        "set": p.set_index,
        "row": p.row_index,
        "total_nodes": p.config.total_nodes,
        "ratio_f": repr(p.config.ratio_f),
        "strategy": p.strategy_spec,
        "ratio_b": p.ratio_spec,
        "seed": result.seed,
        "confirmed_invalid": m.confirmed_invalid,
        "confirmed_valid": m.confirmed_valid,
        "abandoned_invalid": m.abandoned_invalid,
        "abandoned_valid": m.abandoned_valid,
        "total_created": m.total_created,
        "invalid_created": m.invalid_created,
        "valid_created": m.valid_created,
        "live": m.live,
        "invalid_over_total": repr(m.invalid_over_total),
        "valid_over_total": repr(m.valid_over_total),
        "confirm_time_count": len(times),
        "confirm_time_mean": repr(statistics.fmean(times)) if times else "",
        "confirm_time_min": repr(min(times)) if times else "",
        "confirm_time_max": repr(max(times)) if times else "",
        "confirm_times": ";".join(f"{t:.3f}" for t in times),
    }


def write_results(out_dir: str, goal: str, results) -> list[str]:
    """One CSV per testing set plus one JSON summary for the goal.

    Returns the written paths.  UTF-8, header row, LF line endings.
    """
    os.makedirs(out_dir, exist_ok=True)
    by_set: dict[int, list[RunResult]] = {}
    for r in results:
        by_set.setdefault(r.plan.set_index, []).append(r)
    paths = []
    for set_index in sorted(by_set):
        path = os.path.join(out_dir, f"goal_{goal}_set{set_index:02d}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for r in by_set[set_index]:
                writer.writerow(result_row(r))
        paths.append(path)
    summary_path = os.path.join(out_dir, f"goal_{goal}_summary.json")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(aggregate(results), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(summary_path)
    return paths


# -- custom battery files ---------------------------------------------


def write_battery_file(battery: GoalBattery, path: str) -> None:
    """Human-editable JSON mirroring the configuration table columns."""
    doc = {
        "name": battery.goal,
        "notes": list(battery.notes),
        "rows": [
            {
                "set": r.set_index,
                "row": r.row_index,
                "total_nodes": r.total_nodes,
                "ratio_f": list(r.ratio_fs),
                "strategy": list(r.strategies),
                "ratio_b": r.ratio_b,
                "f": r.table_f,
            }
            for r in battery.rows
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_battery_file(path: str) -> GoalBattery:
    """Parse a custom battery file; validates every row."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "rows" not in doc:
        raise ValueError(f"{path}: expected an object with a 'rows' list")
    rows = []
    for i, raw in enumerate(doc["rows"], start=1):
        try:
            set_index = int(raw.get("set", 1))
            row_index = int(raw.get("row", i))
            total = int(raw["total_nodes"])
            ratio_fs = raw["ratio_f"]
            if not isinstance(ratio_fs, list):
                ratio_fs = [ratio_fs]
            ratio_fs = tuple(float(x) for x in ratio_fs)
            strategies = raw["strategy"]
            if isinstance(strategies, str):
                strategies = STAR_STRATEGIES if strategies == "*" else (strategies,)
            ratio_b = str(raw["ratio_b"])
            for s in strategies:
                parse_strategy(s, ratio_b)  # validates behaviors and ratio
            rows.append(_row(set_index, row_index, total, ratio_fs, tuple(strategies),
                             ratio_b, table_f=raw.get("f")))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}: row {i}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: battery has no rows")
    return GoalBattery(str(doc.get("name", "custom")), tuple(rows),
                       tuple(doc.get("notes", ())))
