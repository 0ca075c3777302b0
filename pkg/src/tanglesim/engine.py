"""Discrete-event simulation driver.

One run owns a graph, a node population and a seeded generator.  Nodes
fire send events every D+I simulated seconds (PoW delay I); a global
receive event fires once per simulated second, delivering broadcast
transactions into the shared ledger view and sweeping the abandon and
confirm rules.  Equal (config, seed) pairs reproduce identical metrics.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field, fields

import numpy as np

from . import tangle
from .attacks import AttackStrategy, sample_behavior, _TRIPLES
from .tangle import ABANDONED, ATTACHED, CONFIRMED, GENESIS, TIP, TangleGraph

# event priorities: deliveries land before sends at the same instant
_RECEIVE = 0
_SEND = 1

DEFAULT_SEEDS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class Timing:
    """Continuous timing parameters, all in simulated seconds."""

    interval_d: float = 10.0   # gap between a node's transactions
    pow_i: float = 2.0         # proof-of-work delay per transaction
    intake_n: int = 50         # max deliveries per second

    def validate(self) -> None:
        if self.interval_d <= 0 or self.pow_i < 0 or self.intake_n < 1:
            raise ValueError(f"invalid timing {self}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs for one simulation run (seeds aside)."""

    total_nodes: int
    ratio_f: float
    strategy: AttackStrategy | None
    operating_time: float = 3000.0
    timing: Timing = field(default_factory=Timing)
    seeds: tuple[int, ...] = DEFAULT_SEEDS

    def validate(self) -> None:
        if self.total_nodes < 1:
            raise ValueError(f"need at least one node, got {self.total_nodes}")
        if not 0.0 <= self.ratio_f <= 1.0:
            raise ValueError(f"malicious ratio must be in [0, 1], got {self.ratio_f}")
        if self.operating_time <= 0:
            raise ValueError(f"operating time must be positive, got {self.operating_time}")
        if not self.seeds:
            raise ValueError("seed list must be non-empty")
        if self.malicious_count > 0 and self.strategy is None:
            raise ValueError("malicious nodes need a strategy")
        self.timing.validate()

    @property
    def malicious_count(self) -> int:
        # round-half-up; the published tables use exact products anyway
        return int(self.ratio_f * self.total_nodes + 0.5)


@dataclass(frozen=True)
class MetricsRecord:
    """Outputs of one run."""

    confirmed_invalid: int
    confirmed_valid: int
    confirm_times: tuple[float, ...]
    abandoned_invalid: int
    abandoned_valid: int
    total_created: int
    invalid_created: int
    valid_created: int
    live: int
    invalid_over_total: float
    valid_over_total: float

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def canonical_json(self) -> str:
        d = self.to_dict()
        d["confirm_times"] = list(d["confirm_times"])
        return json.dumps(d, sort_keys=True)


@dataclass
class NodeProfile:
    """One participant; honest nodes always behave as index a."""

    id: int
    is_malicious: bool
    strategy: AttackStrategy | None
    generation_interval: float
    pow_delay: float
    own_valid: list[int] = field(default_factory=list)
    own_invalid: list[int] = field(default_factory=list)


class SimClock:
    """Time-ordered event queue; ties break by (kind, node id, order)."""

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, int, int]] = []
        self._seq = 0

    def schedule(self, time: float, kind: int, node_id: int) -> None:
        heapq.heappush(self._heap, (time, kind, node_id, self._seq))
        self._seq += 1

    def pop(self):
        return heapq.heappop(self._heap)

    def __len__(self) -> int:
        return len(self._heap)


class SimulationRun:
    """Mutable state of one simulation; all randomness flows through rng."""

    def __init__(self, config: ExperimentConfig, seed: int):
        config.validate()
        self.config = config
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.graph = TangleGraph()
        self.clock = SimClock()
        self.now = 0.0
        self.pending: deque[tuple[float, int]] = deque()  # (ready time, tx id)
        self.confirm_times: list[float] = []
        self.behavior_trace: list[str] = []  # per created tx, in id order (genesis excluded)

        t = config.timing
        m = config.malicious_count
        self.nodes = [
            NodeProfile(
                id=i,
                is_malicious=i < m,
                strategy=config.strategy if i < m else None,
                generation_interval=t.interval_d,
                pow_delay=t.pow_i,
            )
            for i in range(config.total_nodes)
        ]
        for node in self.nodes:
            offset = self.rng.uniform(0.0, t.interval_d)
            if offset <= config.operating_time:
                self.clock.schedule(offset, _SEND, node.id)
        if config.operating_time >= 1.0:
            self.clock.schedule(1.0, _RECEIVE, -1)

    # -- workflows ----------------------------------------------------

    def send_step(self, node: NodeProfile) -> int:
        """Create, attach and broadcast one transaction for a node."""
        graph = self.graph
        if node.is_malicious:
            idx = sample_behavior(node.strategy, self.rng)
        else:
            idx = "a"
        valid_tx, random_sel, from_valid = _TRIPLES[idx]
        unit_weight = int(self.rng.integers(1, 5))
        issued_at = self.now + node.pow_delay

        pool = graph.valid_pool if from_valid else graph.invalid_pool
        candidates = pool.view()
        if not random_sel:
            own = node.own_valid if from_valid else node.own_invalid
            mine = [t for t in own if t in pool]
            if len(mine) >= 2:
                candidates = np.asarray(mine, dtype=np.int64)
        if candidates.shape[0] == 0:
            parents = (GENESIS, GENESIS)  # bootstrap: verify genesis
        else:
            parents = tangle.select_parents(graph, candidates, self.now, self.rng)

        tid = graph.add_transaction(node.id, valid_tx, unit_weight, issued_at, parents)
        (node.own_valid if valid_tx else node.own_invalid).append(tid)
        self.behavior_trace.append(idx)
        self.pending.append((issued_at, tid))

        nxt = self.now + node.generation_interval + node.pow_delay
        if nxt <= self.config.operating_time:
            self.clock.schedule(nxt, _SEND, node.id)
        return tid

    def receive_step(self) -> None:
        """Deliver pending broadcasts (capped) and sweep statuses."""
        graph = self.graph
        delivered = 0
        cap = self.config.timing.intake_n
        while self.pending and delivered < cap and self.pending[0][0] <= self.now:
            _, tid = self.pending.popleft()
            graph.deliver(tid)
            delivered += 1
        self._sweep()
        nxt = self.now + 1.0
        if nxt <= self.config.operating_time:
            self.clock.schedule(nxt, _RECEIVE, -1)

    def _sweep(self) -> None:
        """Apply the confirm and abandon rules to the delivered graph.

        Confirms run first so a transaction can never end up in both
        terminal states.
        """
        graph = self.graph
        n = graph.n
        status = graph.status[:n]
        delivered = graph.delivered[:n]
        weight = graph.cum_weight[:n]

        confirmable = delivered & (status == ATTACHED) & (weight >= tangle.CONFIRM_WEIGHT)
        confirmable[GENESIS] = False  # bookkeeping root, not a transaction
        for tid in np.flatnonzero(confirmable):
            graph.mark_confirmed(int(tid))
            self.confirm_times.append(self.now - float(graph.issued_at[tid]))

        status = graph.status[:n]
        live = delivered & ((status == TIP) | (status == ATTACHED))
        age_out = (self.now - graph.issued_at[:n]) > tangle.ABANDON_AGE
        stale = (graph.max_height - graph.height[:n]) > tangle.ABANDON_LEVEL
        light = weight < tangle.ABANDON_WEIGHT
        drop = live & age_out & (stale | light)
        drop[GENESIS] = False
        for tid in np.flatnonzero(drop):
            graph.mark_abandoned(int(tid))

    # -- driving ------------------------------------------------------

    def run(self, on_receive=None) -> MetricsRecord:
        while len(self.clock):
            time, kind, node_id, _ = self.clock.pop()
            self.now = time
            if kind == _RECEIVE:
                self.receive_step()
                if on_receive is not None:
                    on_receive(self)
            else:
                self.send_step(self.nodes[node_id])
        return self.metrics()

    def metrics(self) -> MetricsRecord:
        graph = self.graph
        n = graph.n
        # genesis is bookkeeping, not a created transaction
        status = graph.status[1:n]
        valid = graph.is_valid[1:n]
        total = n - 1
        confirmed_invalid = int(np.count_nonzero((status == CONFIRMED) & ~valid))
        confirmed_valid = int(np.count_nonzero((status == CONFIRMED) & valid))
        abandoned_invalid = int(np.count_nonzero((status == ABANDONED) & ~valid))
        abandoned_valid = int(np.count_nonzero((status == ABANDONED) & valid))
        live = total - confirmed_invalid - confirmed_valid - abandoned_invalid - abandoned_valid
        return MetricsRecord(
            confirmed_invalid=confirmed_invalid,
            confirmed_valid=confirmed_valid,
            confirm_times=tuple(self.confirm_times),
            abandoned_invalid=abandoned_invalid,
            abandoned_valid=abandoned_valid,
            total_created=total,
            invalid_created=int(np.count_nonzero(~valid)),
            valid_created=int(np.count_nonzero(valid)),
            live=live,
            invalid_over_total=confirmed_invalid / total if total else 0.0,
            valid_over_total=confirmed_valid / total if total else 0.0,
        )

    # -- invariant probes (used by tests and acceptance sweeps) -------

    def check_pool_soundness(self) -> bool:
        g = self.graph
        for tid in g.valid_pool:
            if not g.is_valid[tid] or g.status[tid] == ABANDONED:
                return False
        for tid in g.invalid_pool:
            if g.is_valid[tid] or g.status[tid] == ABANDONED:
                return False
        return len(set(g.valid_pool) & set(g.invalid_pool)) == 0


def launch(config: ExperimentConfig, seed: int, on_receive=None) -> MetricsRecord:
    """Run one complete simulation and return its metrics."""
    return SimulationRun(config, seed).run(on_receive=on_receive)
