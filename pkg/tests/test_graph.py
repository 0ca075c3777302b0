"""DAG construction, pools, parent selection and status transitions."""

import numpy as np
import pytest

from tanglesim.tangle import (
    GENESIS,
    IndexPool,
    TangleGraph,
    decide_abandon,
    decide_confirm,
    select_parents,
)


def make_chain(k, spacing=1.0):
    """Genesis plus k transactions, each approving the previous one twice."""
    graph = TangleGraph()
    prev = GENESIS
    for i in range(k):
        tid = graph.add_transaction(0, True, 1, spacing * (i + 1), (prev, prev))
        graph.deliver(tid)
        prev = tid
    return graph


# -- IndexPool --------------------------------------------------------


def test_index_pool_add_discard_view():
    pool = IndexPool()
    for t in (5, 9, 2):
        pool.add(t)
    pool.add(9)  # idempotent
    assert len(pool) == 3
    assert 9 in pool and 4 not in pool
    assert sorted(pool.view().tolist()) == [2, 5, 9]
    pool.discard(5)
    pool.discard(5)  # absent: no-op
    assert sorted(pool) == [2, 9]
    pool.discard(2)
    pool.discard(9)
    assert len(pool) == 0 and pool.view().shape == (0,)


def test_index_pool_grows_past_initial_capacity():
    pool = IndexPool()
    for t in range(1000):
        pool.add(t)
    assert len(pool) == 1000
    assert sorted(pool.view().tolist()) == list(range(1000))


# -- graph construction -----------------------------------------------


def test_genesis_initial_state():
    graph = TangleGraph()
    g = graph.transaction(GENESIS)
    assert g.status == "tip" and g.height == 0 and g.parents == (-1, -1)
    assert graph.cumulative_weight(GENESIS) == 1.0
    assert graph.tips == {GENESIS}
    assert list(graph.valid_pool) == [GENESIS]
    assert len(graph.invalid_pool) == 0


def test_deliver_moves_parent_out_of_tip_set():
    graph = TangleGraph()
    a = graph.add_transaction(1, True, 2, 1.0, (GENESIS, GENESIS))
    assert graph.transaction(a).status == "tip"  # created but not visible
    assert a not in graph.valid_pool
    graph.deliver(a)
    assert graph.tips == {a}
    assert graph.transaction(GENESIS).status == "attached"
    assert sorted(graph.valid_pool) == [GENESIS, a]
    with pytest.raises(ValueError):
        graph.deliver(a)


def test_invalid_transactions_land_in_invalid_pool():
    graph = TangleGraph()
    a = graph.add_transaction(1, False, 1, 1.0, (GENESIS, GENESIS))
    graph.deliver(a)
    assert list(graph.invalid_pool) == [a]
    assert a not in graph.valid_pool


def test_height_and_level_difference():
    graph = make_chain(5)
    assert graph.max_height == 5
    assert graph.level_difference(GENESIS) == 5
    assert graph.level_difference(5) == 0
    assert graph.check_acyclic()


def test_add_transaction_validates_inputs():
    graph = TangleGraph()
    with pytest.raises(ValueError):
        graph.add_transaction(0, True, 0, 1.0, (GENESIS, GENESIS))
    with pytest.raises(ValueError):
        graph.add_transaction(0, True, 5, 1.0, (GENESIS, GENESIS))
    with pytest.raises(KeyError):
        graph.add_transaction(0, True, 1, 1.0, (GENESIS, 7))
    with pytest.raises(KeyError):
        graph.transaction(42)


def test_graph_grows_past_initial_capacity():
    graph = make_chain(1500)
    assert len(graph) == 1501
    assert graph.max_height == 1500
    assert graph.check_acyclic()


# -- parent selection -------------------------------------------------


def test_select_parents_empty_and_single():
    graph = make_chain(2)
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        select_parents(graph, [], 1.0, rng)
    assert select_parents(graph, [2], 1.0, rng) == (2, 2)


def test_select_parents_draws_without_replacement():
    graph = make_chain(4)
    rng = np.random.default_rng(1)
    for _ in range(200):
        p1, p2 = select_parents(graph, graph.valid_pool, 5.0, rng)
        assert p1 != p2


def test_select_parents_frequency_tracks_scores():
    # three fresh siblings with cumulative weights 2, 8 and 14: scores are
    # 3*|15-W| + 100/5 - age, i.e. roughly 59:41:23 at age ~0
    graph = TangleGraph()
    tids = []
    for w in (2, 8, 14):
        t = graph.add_transaction(0, True, 1, 0.0, (GENESIS, GENESIS))
        graph.deliver(t)
        graph.cum_weight[t] = w
        tids.append(t)
    now = 0.0
    scores = np.array([3 * abs(15 - w) + 100 / 5 - 1.5 ** (now / 60) for w in (2, 8, 14)])
    want = scores / scores.sum()

    rng = np.random.default_rng(42)
    counts = {t: 0 for t in tids}
    trials = 20000
    for _ in range(trials):
        first, _second = select_parents(graph, np.array(tids, dtype=np.int64), now, rng)
        counts[first] += 1
    got = np.array([counts[t] / trials for t in tids])
    np.testing.assert_allclose(got, want, atol=0.015)


def test_select_parents_certain_candidate_always_wins():
    # one candidate holds all the probability mass: it is always first pick.
    # At age 480 s the age penalty (~25.6) swamps the level term (20), so
    # the weight-15 candidates score zero while W=0 keeps 3*15 extra.
    graph = TangleGraph()
    tids = []
    for w in (0.0, 15.0, 15.0):
        t = graph.add_transaction(0, True, 1, 0.0, (GENESIS, GENESIS))
        graph.deliver(t)
        graph.cum_weight[t] = w
        tids.append(t)
    now = 60 * 8.0
    rng = np.random.default_rng(3)
    firsts = {select_parents(graph, np.array(tids, dtype=np.int64), now, rng)[0]
              for _ in range(500)}
    assert firsts == {tids[0]}


def test_select_parents_uniform_fallback_when_all_scores_zero():
    graph = TangleGraph()
    tids = []
    for _ in range(3):
        t = graph.add_transaction(0, True, 1, 0.0, (GENESIS, GENESIS))
        graph.deliver(t)
        graph.cum_weight[t] = 15.0  # weight term zero
        tids.append(t)
    now = 60 * 10.0  # age penalty far beyond the level term
    rng = np.random.default_rng(9)
    counts = {t: 0 for t in tids}
    for _ in range(6000):
        p1, p2 = select_parents(graph, np.array(tids, dtype=np.int64), now, rng)
        assert p1 != p2
        counts[p1] += 1
    for t in tids:
        assert counts[t] / 6000 == pytest.approx(1 / 3, abs=0.03)


# -- status transitions -----------------------------------------------


def test_mark_abandoned_removes_from_pools_and_tips():
    graph = TangleGraph()
    a = graph.add_transaction(0, False, 1, 1.0, (GENESIS, GENESIS))
    graph.deliver(a)
    graph.mark_abandoned(a)
    assert graph.transaction(a).status == "abandoned"
    assert a not in graph.tips and a not in graph.invalid_pool
    with pytest.raises(ValueError):
        graph.mark_abandoned(a)


def test_mark_confirmed_requires_attached():
    graph = TangleGraph()
    a = graph.add_transaction(0, True, 1, 1.0, (GENESIS, GENESIS))
    graph.deliver(a)
    with pytest.raises(ValueError):
        graph.mark_confirmed(a)  # still a tip
    b = graph.add_transaction(0, True, 1, 2.0, (a, GENESIS))
    graph.deliver(b)
    graph.mark_confirmed(a)
    assert graph.transaction(a).status == "confirmed"
    with pytest.raises(ValueError):
        graph.mark_confirmed(a)


def test_decide_abandon_examples():
    graph = make_chain(40, spacing=1.0)
    now = 2000.0
    # genesis: level difference 40 > 30 and old -> abandon
    assert decide_abandon(graph, GENESIS, now)
    # the newest transaction: young -> keep
    assert not decide_abandon(graph, 40, 41.0)
    # old but heavy and near the frontier -> keep
    graph.cum_weight[39] = 50.0
    assert not decide_abandon(graph, 39, now)
    # old and light -> abandon even near the frontier
    graph.cum_weight[38] = 3.0
    assert decide_abandon(graph, 38, now)
    graph.mark_abandoned(38)
    with pytest.raises(ValueError):
        decide_abandon(graph, 38, now)


def test_decide_confirm_threshold():
    graph = TangleGraph()
    a = graph.add_transaction(0, True, 1, 1.0, (GENESIS, GENESIS))
    graph.deliver(a)
    b = graph.add_transaction(0, True, 1, 2.0, (a, GENESIS))
    graph.deliver(b)
    assert not decide_confirm(graph, a)
    graph.cum_weight[a] = 29.999
    assert not decide_confirm(graph, a)
    graph.cum_weight[a] = 30.0
    assert decide_confirm(graph, a)
    assert not decide_confirm(graph, b)  # tip, not attached
