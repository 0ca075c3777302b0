"""Layered adversary model.

Layer 0 is three binary unit actions: payload validity (A), random vs
selfish parent selection (B), and drawing parents from the valid vs
invalid pool (C).  Layer 1 is the six feasible (A, B, C) combinations,
indexed a..f.  Layer 2 combines behaviors into strategies and labels
them parasite (PS), double-spending (DS) or hybrid (HB) via a staged
decision rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

# attack kinds
PS = "PS"
DS = "DS"
HB = "HB"
NOT_AN_ATTACK = "NotAnAttack"

INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class UnitActionTriple:
    """One Layer-0 choice per action: True picks the first option.

    valid_tx: honest payload vs conflicting payload.
    random_selection: random vs selfish (own prior transactions only).
    from_valid_pool: draw parents from the valid vs invalid pool.
    """

    valid_tx: bool
    random_selection: bool
    from_valid_pool: bool


# index <-> bit-triple mapping; 100 and 000 are infeasible:
# a node sending only valid transactions has no invalid pool to draw
# from selfishly, and selfish-over-invalid degenerates to random.
_TRIPLES = {
    "a": (True, True, True),
    "b": (True, True, False),
    "c": (True, False, True),
    "d": (False, True, True),
    "e": (False, True, False),
    "f": (False, False, True),
}
BEHAVIOR_INDEXES = tuple(sorted(_TRIPLES))
_BITS_TO_INDEX = {bits: idx for idx, bits in _TRIPLES.items()}

# decision-rule stage sets
_SENDS_INVALID = frozenset("def")     # stage 2
_VERIFIES_INVALID = frozenset("be")   # stage 3
_OVERLAPPING = frozenset("cf")        # stage 4
_CONFUSION = "a"                      # stage 1


@dataclass(frozen=True)
class AtomicBehavior:
    index: str
    triple: UnitActionTriple


def behavior(index: str) -> AtomicBehavior:
    """The atomic behavior for one of the six indexes a..f."""
    try:
        bits = _TRIPLES[index]
    except KeyError:
        raise ValueError(f"unknown behavior index {index!r}") from None
    return AtomicBehavior(index, UnitActionTriple(*bits))


def behavior_from_bits(valid_tx: bool, random_selection: bool, from_valid_pool: bool):
    """Map an action triple to its behavior index, or INFEASIBLE."""
    idx = _BITS_TO_INDEX.get((bool(valid_tx), bool(random_selection), bool(from_valid_pool)))
    if idx is None:
        return INFEASIBLE
    return behavior(idx)


def classify_strategy(behaviors) -> str:
    """Label a behavior set as PS, DS, HB or NOT_AN_ATTACK.

    Staged rule: PS needs the selfish-overlap stage only (c, optionally
    hidden behind confusion a); DS needs both the send-invalid and
    verify-invalid stages with no overlap stage; HB needs all three
    stages and at most three non-confusion behaviors, which reproduces
    the published hybrid enumeration exactly.
    """
    s = frozenset(behaviors)
    if not s:
        raise ValueError("behavior set must be non-empty")
    unknown = s - set(BEHAVIOR_INDEXES)
    if unknown:
        raise ValueError(f"unknown behavior indexes {sorted(unknown)}")
    sends = s & _SENDS_INVALID
    verifies = s & _VERIFIES_INVALID
    overlap = s & _OVERLAPPING
    core = s - {_CONFUSION}
    if not sends and not verifies and s <= {"a", "c"} and "c" in s:
        return PS
    if sends and verifies and not overlap:
        return DS
    if sends and verifies and overlap and len(core) <= 3:
        return HB
    return NOT_AN_ATTACK


@dataclass(frozen=True)
class PhiDecision:
    """Stage activation record for one behavior set."""

    has_confusion: bool
    sends_invalid: frozenset
    verifies_invalid: frozenset
    overlapping: frozenset


def phi_decision(behaviors) -> PhiDecision:
    s = frozenset(behaviors)
    return PhiDecision(
        has_confusion=_CONFUSION in s,
        sends_invalid=s & _SENDS_INVALID,
        verifies_invalid=s & _VERIFIES_INVALID,
        overlapping=s & _OVERLAPPING,
    )


# the DS column as published lists these eight strings but is labeled
# with a count of 7; the enumeration report surfaces both facts
PUBLISHED_DS = ("e", "ae", "bd", "de", "abd", "ade", "bde", "abde")
PUBLISHED_DS_COUNT_LABEL = 7


def enumerate_strategies() -> dict:
    """Classify every non-empty behavior subset.

    Returns the partition keyed by kind (behavior sets as sorted
    strings) plus a "report" entry noting where the derived DS bucket
    diverges from the published list.
    """
    buckets: dict[str, list[str]] = {PS: [], DS: [], HB: [], NOT_AN_ATTACK: []}
    for r in range(1, len(BEHAVIOR_INDEXES) + 1):
        for combo in combinations(BEHAVIOR_INDEXES, r):
            buckets[classify_strategy(combo)].append("".join(combo))
    ds = buckets[DS]
    extras = sorted(set(ds) - set(PUBLISHED_DS), key=lambda s: (len(s), s))
    report = {
        "ds_published": list(PUBLISHED_DS),
        "ds_published_count_label": PUBLISHED_DS_COUNT_LABEL,
        "ds_published_actual_count": len(PUBLISHED_DS),
        "ds_derived_count": len(ds),
        "ds_derived_extras": extras,
        "note": ("published DS column lists 8 strings under a count label of 7; "
                 f"the staged rule additionally admits {', '.join(extras)}"),
    }
    buckets["report"] = report
    return buckets


RATIO_SUM = 10  # published behavior ratios always sum to 10 (e.g. 4:3:3)


@dataclass(frozen=True)
class AttackStrategy:
    """A behavior set with its mixing ratio, e.g. abd with 6:2:2.

    Behaviors are kept in alphabetical order and the ratio binds
    positionally to that order.
    """

    behaviors: tuple[str, ...]
    ratio: tuple[int, ...]
    kind: str = field(init=False)

    def __post_init__(self):
        if not self.behaviors:
            raise ValueError("strategy needs at least one behavior")
        if list(self.behaviors) != sorted(set(self.behaviors)):
            raise ValueError(f"behaviors must be unique and sorted, got {self.behaviors}")
        if len(self.ratio) != len(self.behaviors):
            raise ValueError(f"ratio length {len(self.ratio)} != behavior count {len(self.behaviors)}")
        if any(r <= 0 for r in self.ratio):
            raise ValueError(f"ratio entries must be positive, got {self.ratio}")
        if sum(self.ratio) != RATIO_SUM:
            raise ValueError(f"ratio must sum to {RATIO_SUM}, got {self.ratio}")
        kind = classify_strategy(self.behaviors)
        if kind == NOT_AN_ATTACK:
            raise ValueError(f"behavior set {''.join(self.behaviors)} is not an attack")
        object.__setattr__(self, "kind", kind)

    @property
    def spec(self) -> str:
        return "".join(self.behaviors)

    @property
    def ratio_spec(self) -> str:
        return ":".join(str(r) for r in self.ratio)

    def __str__(self) -> str:
        return f"{self.spec} {self.ratio_spec}"


def parse_strategy(behaviors_spec: str, ratio_spec: str) -> AttackStrategy:
    """Build a strategy from table notation, e.g. ("abd", "6:2:2").

    A single-behavior strategy may give its ratio as "-" (degenerate 10).
    """
    behaviors = tuple(sorted(behaviors_spec.strip()))
    if ratio_spec.strip() in ("-", ""):
        ratio = (RATIO_SUM,)
    else:
        try:
            ratio = tuple(int(x) for x in ratio_spec.strip().split(":"))
        except ValueError:
            raise ValueError(f"malformed ratio {ratio_spec!r}") from None
    return AttackStrategy(behaviors, ratio)


def sample_behavior(strategy: AttackStrategy, rng) -> str:
    """Draw one behavior index with probability ratio/10."""
    u = rng.random() * RATIO_SUM
    acc = 0
    for idx, r in zip(strategy.behaviors, strategy.ratio):
        acc += r
        if u < acc:
            return idx
    return strategy.behaviors[-1]
