"""Deterministic Tangle-style DAG ledger simulator with layered attacks."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .attacks import (
    AtomicBehavior,
    AttackStrategy,
    behavior_from_bits,
    classify_strategy,
    enumerate_strategies,
    parse_strategy,
    sample_behavior,
)
from .engine import ExperimentConfig, MetricsRecord, NodeProfile, SimulationRun, Timing, launch
from .experiments import GoalBattery, RunResult, aggregate, load_goal, run_battery
from .tangle import (
    TangleGraph,
    Transaction,
    decide_abandon,
    decide_confirm,
    propagate_weight,
    round_weight,
    select_parents,
    selection_probability,
)

__all__ = [
    "KERNEL_BACKEND",
    "AtomicBehavior",
    "AttackStrategy",
    "behavior_from_bits",
    "classify_strategy",
    "enumerate_strategies",
    "parse_strategy",
    "sample_behavior",
    "ExperimentConfig",
    "MetricsRecord",
    "NodeProfile",
    "SimulationRun",
    "Timing",
    "launch",
    "GoalBattery",
    "RunResult",
    "aggregate",
    "load_goal",
    "run_battery",
    "TangleGraph",
    "Transaction",
    "decide_abandon",
    "decide_confirm",
    "propagate_weight",
    "round_weight",
    "select_parents",
    "selection_probability",
]

__version__ = "0.1.0"
