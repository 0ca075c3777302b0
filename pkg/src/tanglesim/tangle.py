"""Tangle DAG core.

The graph stores one append-only DAG: every transaction approves two
parents, ancestors accumulate decayed round weights as new tips attach,
and parents are drawn with probability proportional to a score built
from cumulative weight, level difference and age.  Stale or underweight
transactions get abandoned after a timeout; attached transactions whose
cumulative weight crosses the threshold are confirmed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels.pure import AGE_RATE

GENESIS = 0

# status codes (transitions: tip -> attached -> {confirmed | abandoned},
# tip -> abandoned; confirmed and abandoned are terminal)
TIP = 0
ATTACHED = 1
CONFIRMED = 2
ABANDONED = 3
STATUS_NAMES = {TIP: "tip", ATTACHED: "attached", CONFIRMED: "confirmed", ABANDONED: "abandoned"}

LEVEL_CUTOFF = _kernels.LEVEL_CUTOFF  # round weight is zero at level difference >= 30
CONFIRM_WEIGHT = 30.0
ABANDON_WEIGHT = 30.0
ABANDON_LEVEL = 30
ABANDON_AGE = 1000.0


def _base_weight_table() -> np.ndarray:
    """Per-level round weight for a unit current weight of 1.

    Index is the level difference; entry 0 is unused and set to 0.
    """
    t = np.zeros(LEVEL_CUTOFF)
    t[1] = 1.0
    for i in range(2, 7):
        t[i] = 0.8 * t[i - 1]
    for i in range(7, 17):
        t[i] = 0.9 * t[i - 1]
    for i in range(17, LEVEL_CUTOFF):
        t[i] = 0.01 * t[1]
    return t


_BASE_TABLE = _base_weight_table()


def round_weight(w_c: float, level_difference: int) -> float:
    """Weight contributed to an ancestor at the given level difference.

    The decay is piecewise: full weight at L=1, 0.8 decay through L=6,
    0.9 decay through L=16, a flat 1% of the base through L=29, and
    nothing at L>=30.
    """
    if w_c <= 0:
        raise ValueError(f"current weight must be positive, got {w_c}")
    if level_difference < 1:
        raise ValueError(f"level difference must be >= 1, got {level_difference}")
    if level_difference >= LEVEL_CUTOFF:
        return 0.0
    return w_c * _BASE_TABLE[level_difference]


def selection_probability(cumulative_weight: float, level_difference: int, elapsed: float) -> float:
    """Unnormalized probability weight for selecting one candidate parent."""
    if level_difference < 1:
        raise ValueError(f"level difference must be >= 1, got {level_difference}")
    if elapsed < 0:
        raise ValueError(f"elapsed time must be >= 0, got {elapsed}")
    p = 3.0 * abs(15.0 - cumulative_weight) + 100.0 / 5.0 ** level_difference - 1.5 ** (elapsed / 60.0)
    return max(0.0, p)


def abandon_rule(level_difference: int, cumulative_weight: float, age: float) -> bool:
    """Pruning predicate: stale level or underweight, and past the timeout."""
    return (level_difference > ABANDON_LEVEL or cumulative_weight < ABANDON_WEIGHT) and age > ABANDON_AGE


@dataclass(frozen=True)
class Transaction:
    """Read-only snapshot of one DAG vertex."""

    id: int
    issuer: int
    is_valid: bool
    unit_weight: int
    height: int
    issued_at: float
    parents: tuple[int, int]
    status: str


class IndexPool:
    """Set of transaction ids with O(1) add/discard and an array view.

    Removal swaps with the last slot, so iteration order depends on the
    removal history; that order is itself deterministic.
    """

    def __init__(self) -> None:
        self._items = np.empty(256, dtype=np.int64)
        self._pos: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._pos)

    def __contains__(self, tid: int) -> bool:
        return tid in self._pos

    def __iter__(self):
        return iter(self.view().tolist())

    def add(self, tid: int) -> None:
        if tid in self._pos:
            return
        n = len(self._pos)
        if n == self._items.shape[0]:
            self._items = np.resize(self._items, 2 * n)
        self._items[n] = tid
        self._pos[tid] = n

    def discard(self, tid: int) -> None:
        i = self._pos.pop(tid, None)
        if i is None:
            return
        last = len(self._pos)
        if i != last:
            moved = self._items[last]
            self._items[i] = moved
            self._pos[moved] = i

    def view(self) -> np.ndarray:
        """Current members as an int64 array (do not mutate)."""
        return self._items[: len(self._pos)]


class TangleGraph:
    """Append-only DAG plus tip set, parent pools and cumulative weights.

    Data lives in parallel numpy arrays so the weight-propagation and
    scoring kernels can run over raw buffers; `transaction()` returns a
    snapshot object for inspection.  Owned by a single simulation run.
    """

    def __init__(self, genesis_time: float = 0.0) -> None:
        cap = 1024
        self.height = np.zeros(cap, dtype=np.int64)
        self.unit_weight = np.zeros(cap, dtype=np.int64)
        self.cum_weight = np.zeros(cap, dtype=np.float64)
        self.issued_at = np.zeros(cap, dtype=np.float64)
        self.age_factor = np.zeros(cap, dtype=np.float64)
        self.parent1 = np.full(cap, -1, dtype=np.int64)
        self.parent2 = np.full(cap, -1, dtype=np.int64)
        self.issuer = np.full(cap, -1, dtype=np.int64)
        self.is_valid = np.zeros(cap, dtype=bool)
        self.status = np.zeros(cap, dtype=np.int8)
        self.delivered = np.zeros(cap, dtype=bool)
        self.n = 0
        self.max_height = 0
        self.tips: set[int] = set()
        self.valid_pool = IndexPool()
        self.invalid_pool = IndexPool()

        gid = self._append(issuer=-1, is_valid=True, unit_weight=1,
                           issued_at=genesis_time, parents=(-1, -1), height=0)
        assert gid == GENESIS
        self.cum_weight[GENESIS] = self.unit_weight[GENESIS]
        self.delivered[GENESIS] = True
        self.tips.add(GENESIS)
        self.valid_pool.add(GENESIS)

    # -- construction -------------------------------------------------

    def _grow(self) -> None:
        cap = self.height.shape[0]
        for name in ("height", "unit_weight", "cum_weight", "issued_at", "age_factor",
                     "parent1", "parent2", "issuer", "is_valid", "status", "delivered"):
            old = getattr(self, name)
            new = np.empty(2 * cap, dtype=old.dtype)
            new[:cap] = old
            setattr(self, name, new)

    def _append(self, issuer, is_valid, unit_weight, issued_at, parents, height) -> int:
        if self.n == self.height.shape[0]:
            self._grow()
        i = self.n
        self.height[i] = height
        self.unit_weight[i] = unit_weight
        self.cum_weight[i] = 0.0
        self.issued_at[i] = issued_at
        # half of the factored age penalty 1.5**(age/60); see select_parents
        self.age_factor[i] = math.exp(-issued_at * AGE_RATE)
        self.parent1[i], self.parent2[i] = parents
        self.issuer[i] = issuer
        self.is_valid[i] = is_valid
        self.status[i] = TIP
        self.delivered[i] = False
        self.n += 1
        return i

    def add_transaction(self, issuer: int, is_valid: bool, unit_weight: int,
                        issued_at: float, parents: tuple[int, int]) -> int:
        """Create a transaction approving two existing parents.

        The transaction is not visible to selection until `deliver()`.
        """
        if not 1 <= unit_weight <= 4:
            raise ValueError(f"unit weight must be in 1..4, got {unit_weight}")
        p1, p2 = parents
        for p in (p1, p2):
            if not 0 <= p < self.n:
                raise KeyError(f"unknown parent id {p}")
        height = 1 + max(self.height[p1], self.height[p2])
        return self._append(issuer, is_valid, unit_weight, issued_at, (p1, p2), int(height))

    def deliver(self, tid: int) -> None:
        """Make a broadcast transaction visible: pools, tips, weights."""
        self._check_id(tid)
        if self.delivered[tid]:
            raise ValueError(f"transaction {tid} already delivered")
        self.delivered[tid] = True
        pool = self.valid_pool if self.is_valid[tid] else self.invalid_pool
        pool.add(tid)
        self.tips.add(tid)
        for p in {int(self.parent1[tid]), int(self.parent2[tid])}:
            if self.status[p] == TIP:
                self.status[p] = ATTACHED
                self.tips.discard(p)
        if self.height[tid] > self.max_height:
            self.max_height = int(self.height[tid])
        propagate_weight(self, tid)

    # -- queries ------------------------------------------------------

    def _check_id(self, tid: int) -> None:
        if not 0 <= tid < self.n:
            raise KeyError(f"unknown transaction id {tid}")

    def __len__(self) -> int:
        return self.n

    def transaction(self, tid: int) -> Transaction:
        self._check_id(tid)
        parents = (int(self.parent1[tid]), int(self.parent2[tid])) if tid != GENESIS else (-1, -1)
        return Transaction(
            id=tid,
            issuer=int(self.issuer[tid]),
            is_valid=bool(self.is_valid[tid]),
            unit_weight=int(self.unit_weight[tid]),
            height=int(self.height[tid]),
            issued_at=float(self.issued_at[tid]),
            parents=parents,
            status=STATUS_NAMES[int(self.status[tid])],
        )

    def cumulative_weight(self, tid: int) -> float:
        self._check_id(tid)
        return float(self.cum_weight[tid])

    def level_difference(self, tid: int) -> int:
        """Height gap between the DAG frontier and a transaction."""
        self._check_id(tid)
        return self.max_height - int(self.height[tid])

    def check_acyclic(self) -> bool:
        """Every edge points to a strictly lower height."""
        idx = np.arange(1, self.n)
        p1 = self.parent1[idx]
        p2 = self.parent2[idx]
        h = self.height[idx]
        return bool(np.all(self.height[p1] < h) and np.all(self.height[p2] < h))

    # -- status transitions -------------------------------------------

    def mark_abandoned(self, tid: int) -> None:
        self._check_id(tid)
        if self.status[tid] in (CONFIRMED, ABANDONED):
            raise ValueError(f"transaction {tid} already terminal")
        self.status[tid] = ABANDONED
        self.tips.discard(tid)
        self.valid_pool.discard(tid)
        self.invalid_pool.discard(tid)

    def mark_confirmed(self, tid: int) -> None:
        self._check_id(tid)
        if self.status[tid] != ATTACHED:
            raise ValueError(f"only attached transactions confirm, {tid} is "
                             f"{STATUS_NAMES[int(self.status[tid])]}")
        self.status[tid] = CONFIRMED


def propagate_weight(graph: TangleGraph, tid: int) -> None:
    """Initialize a new tip's own weight and credit its ancestors.

    Each ancestor within the level cutoff is credited round_weight(unit
    weight of the tip, level difference) exactly once, regardless of how
    many paths reach it.
    """
    graph._check_id(tid)
    graph.cum_weight[tid] = graph.unit_weight[tid]
    if tid == GENESIS:
        return
    n = graph.n
    table = graph.unit_weight[tid] * _BASE_TABLE
    _kernels.propagate(graph.parent1[:n], graph.parent2[:n], graph.height[:n],
                       graph.cum_weight[:n], tid, table)


def _uniform_pair(n: int, rng) -> tuple[int, int]:
    i = int(rng.integers(n))
    j = int(rng.integers(n - 1))
    if j >= i:
        j += 1
    return i, j


def select_parents(graph: TangleGraph, candidate_pool, now: float, rng) -> tuple[int, int]:
    """Draw two parents from the pool, weighted by selection probability.

    Draws are without replacement when the pool has at least two
    members; a single-member pool fills both slots.  If every candidate
    scores zero the draw falls back to uniform so the run cannot stall.
    """
    if isinstance(candidate_pool, IndexPool):
        cands = candidate_pool.view()
    elif isinstance(candidate_pool, np.ndarray):
        cands = candidate_pool.astype(np.int64, copy=False)
    else:
        cands = np.asarray(sorted(candidate_pool), dtype=np.int64)
    m = cands.shape[0]
    if m == 0:
        raise ValueError("empty candidate pool")
    if m == 1:
        only = int(cands[0])
        return only, only
    n = graph.n
    # 1.5**((now - issued)/60) split into exp(now*r) * exp(-issued*r) so the
    # scoring kernel multiplies instead of exponentiating per candidate
    now_factor = math.exp(now * AGE_RATE)
    scores = _kernels.selection_scores(cands, graph.cum_weight[:n], graph.height[:n],
                                       graph.age_factor[:n], graph.max_height, now_factor)
    if scores.sum() <= 0.0:
        i, j = _uniform_pair(m, rng)
        return int(cands[i]), int(cands[j])
    i = _kernels.pick_weighted(scores, rng.random())
    first = int(cands[i])
    scores[i] = 0.0
    if scores.sum() <= 0.0:
        j = int(rng.integers(m - 1))
        if j >= i:
            j += 1
    else:
        j = _kernels.pick_weighted(scores, rng.random())
    return first, int(cands[j])


def decide_abandon(graph: TangleGraph, tid: int, now: float) -> bool:
    """True when the transaction should be pruned (caller applies it)."""
    graph._check_id(tid)
    if graph.status[tid] in (CONFIRMED, ABANDONED):
        raise ValueError(f"transaction {tid} already terminal")
    level = graph.max_height - int(graph.height[tid])
    age = now - float(graph.issued_at[tid])
    return abandon_rule(level, float(graph.cum_weight[tid]), age)


def decide_confirm(graph: TangleGraph, tid: int) -> bool:
    """True when an attached transaction's weight crosses the threshold."""
    graph._check_id(tid)
    return graph.status[tid] == ATTACHED and graph.cum_weight[tid] >= CONFIRM_WEIGHT
