import math

import numpy as np
import pytest

from clauseviz.graph import (EDGE_EPS, GraphState, ReductionKind,
                             WeightFunction, WeightedGraph, read_edge_list,
                             reduce_clause, write_dot, write_edge_list)
from clauseviz.model import ClauseEvent, CnfFormula, EventKind, canonicalize

from conftest import random_events

RING = ReductionKind.RING
CLIQUE = ReductionKind.CLIQUE
W1 = WeightFunction.INVERSE_SIZE_MINUS_ONE


def brute_force_weights(multiset, reduction, weight_fn):
    """Independent oracle: recount every live clause's contribution."""
    weights = {}
    for clause, count in multiset.items():
        if len(clause) < 2:
            continue
        w = count * weight_fn.weight(len(clause))
        for u, v in reduce_clause(clause, reduction):
            key = (u, v) if u < v else (v, u)
            weights[key] = weights.get(key, 0.0) + w
    return {k: w for k, w in weights.items() if w > EDGE_EPS}


def live_multiset(events):
    """Oracle bookkeeping of live counts from an event list."""
    ms = {}
    for ev in events:
        if ev.clause is None:
            continue
        if ev.kind is EventKind.ADD:
            ms[ev.clause] = ms.get(ev.clause, 0) + 1
        elif ms.get(ev.clause, 0) > 0:
            ms[ev.clause] -= 1
            if not ms[ev.clause]:
                del ms[ev.clause]
    return ms


def test_reduce_ring_triangle_closing():
    clause = canonicalize([1, 3, 7])
    assert set(reduce_clause(clause, RING)) == {(1, 3), (3, 7), (1, 7)}


def test_reduce_clique_k4():
    clause = canonicalize([1, 2, 3, 4])
    assert set(reduce_clause(clause, CLIQUE)) == {
        (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)}


def test_reduce_binary_degenerate_ring():
    clause = canonicalize([5, 9])
    assert reduce_clause(clause, RING) == [(5, 9)]
    assert reduce_clause(clause, CLIQUE) == [(5, 9)]


def test_reduce_small_clauses():
    assert reduce_clause((7,), RING) == []
    assert reduce_clause((), CLIQUE) == []


def test_reduce_handles_negated_literals():
    clause = canonicalize([-1, 2, -5])
    assert set(reduce_clause(clause, RING)) == {(1, 2), (2, 5), (1, 5)}


@pytest.mark.parametrize("kind", [RING, CLIQUE])
def test_edge_count_law(kind, rng):
    # ring gives exactly |c| pairs for |c| >= 3, clique |c|(|c|-1)/2
    for _ in range(200):
        size = int(rng.integers(3, 21))
        variables = rng.choice(np.arange(1, 100), size=size, replace=False)
        clause = canonicalize([int(v) for v in variables])
        pairs = reduce_clause(clause, kind)
        assert len(pairs) == len(set(pairs))
        if kind is RING:
            assert len(pairs) == size
        else:
            assert len(pairs) == size * (size - 1) // 2


def test_weight_functions():
    assert W1.weight(2) == 1.0
    assert W1.weight(3) == 0.5
    assert WeightFunction.INVERSE_SIZE.weight(4) == 0.25
    assert WeightFunction.EXPONENTIAL_DECAY.weight(3) == 0.25
    for wf in WeightFunction:
        values = [wf.weight(s) for s in range(2, 12)]
        assert all(v > 0 for v in values)
        assert all(a > b for a, b in zip(values, values[1:]))


def test_build_initial_binary_clauses():
    f = CnfFormula(3, [canonicalize([1, 2]), canonicalize([2, 3])])
    state = GraphState.build_initial(f, RING, W1)
    assert state.graph.edges == {(1, 2): 1.0, (2, 3): 1.0}


def test_build_initial_clique_triple():
    f = CnfFormula(3, [canonicalize([1, 2, 3])])
    state = GraphState.build_initial(f, CLIQUE, W1)
    assert state.graph.edges == {(1, 2): 0.5, (1, 3): 0.5, (2, 3): 0.5}


def test_build_initial_overlapping_contributions():
    # oracle-derived: (1,2) gets 1.0 + 0.5, ring of the triple adds the rest
    f = CnfFormula(3, [canonicalize([1, 2]), canonicalize([1, 2, 3])])
    state = GraphState.build_initial(f, RING, W1)
    expected = brute_force_weights({(1, 2): 1, (1, 2, 3): 1}, RING, W1)
    assert expected == {(1, 2): 1.5, (2, 3): 0.5, (1, 3): 0.5}
    assert state.graph.edges == pytest.approx(expected)


def test_isolated_variables_remain():
    f = CnfFormula(9, [canonicalize([1, 2])])
    state = GraphState.build_initial(f, RING, W1)
    assert state.graph.num_nodes == 9
    assert state.graph.edge_count == 1


def test_add_delete_inverse():
    state = GraphState(5, RING, W1)
    add = ClauseEvent(EventKind.ADD, canonicalize([4, 5]), 0)
    state.apply_event(add)
    assert state.graph.edges == {(4, 5): 1.0}
    state.apply_event(ClauseEvent(EventKind.DELETE, canonicalize([4, 5]), 1))
    assert state.graph.edges == {}
    assert state.multiset == {}


def test_unknown_delete_counted():
    state = GraphState(8, RING, W1)
    state.apply_event(ClauseEvent(EventKind.DELETE, canonicalize([7, 8]), 0))
    assert state.graph.edges == {}
    assert state.unknown_deletes == 1


def test_tautology_events_are_inert():
    state = GraphState(3, RING, W1)
    state.apply_event(ClauseEvent(EventKind.ADD, canonicalize([1, -1]), 0))
    assert state.graph.edges == {} and state.multiset == {}
    state.apply_event(ClauseEvent(EventKind.DELETE, canonicalize([1, -1]), 1))
    assert state.unknown_deletes == 1


def test_double_add_single_delete():
    state = GraphState(3, RING, W1)
    clause = canonicalize([1, 2, 3])
    state.apply_event(ClauseEvent(EventKind.ADD, clause, 0))
    state.apply_event(ClauseEvent(EventKind.ADD, clause, 1))
    state.apply_event(ClauseEvent(EventKind.DELETE, clause, 2))
    for pair in [(1, 2), (2, 3), (1, 3)]:
        assert state.graph.weight(*pair) == pytest.approx(0.5, abs=1e-12)
    assert state.multiset == {clause: 1}


def test_learned_variables_extend_node_set():
    state = GraphState(3, RING, W1)
    state.apply_event(ClauseEvent(EventKind.ADD, canonicalize([2, 11]), 0))
    assert state.graph.num_nodes == 11
    state.apply_event(ClauseEvent(EventKind.DELETE, canonicalize([2, 11]), 1))
    assert state.graph.num_nodes == 11  # nodes never shrink


def test_replay_then_inverse_restores_graph(rng):
    f = CnfFormula(20, [canonicalize(c) for c in [(1, 2), (3, 4, 5), (6, -7)]])
    state = GraphState.build_initial(f, RING, W1)
    baseline = dict(state.graph.edges)
    events = random_events(rng, 100, 20, max_len=6)
    inverse = []
    for ev in events:
        before = state.multiset.get(ev.clause, 0) if ev.clause else 0
        state.apply_event(ev)
        if ev.clause is None:
            continue
        if ev.kind is EventKind.ADD:
            inverse.append(ClauseEvent(EventKind.DELETE, ev.clause, -1))
        elif before > 0:
            inverse.append(ClauseEvent(EventKind.ADD, ev.clause, -1))
    for ev in reversed(inverse):
        state.apply_event(ev)
    assert set(state.graph.edges) == set(baseline)
    for key, w in baseline.items():
        assert state.graph.edges[key] == pytest.approx(w, abs=1e-9)


@pytest.mark.parametrize("kind", [RING, CLIQUE])
def test_incremental_matches_recount_oracle(kind, rng):
    for trial in range(30):
        state = GraphState(50, kind, W1)
        events = random_events(np.random.default_rng(trial), 200, 50, max_len=8)
        for ev in events:
            state.apply_event(ev)
        expected = brute_force_weights(live_multiset(events), kind, W1)
        assert set(state.graph.edges) == set(expected)
        for key, w in expected.items():
            assert state.graph.edges[key] == pytest.approx(w, abs=1e-9)
        # the multiset itself must agree with the oracle bookkeeping
        assert state.multiset == live_multiset(events)


def test_rebuild_equals_incremental(rng):
    state = GraphState(30, RING, W1)
    for ev in random_events(rng, 500, 30):
        state.apply_event(ev)
    rebuilt = state.rebuild()
    assert set(rebuilt.edges) == set(state.graph.edges)
    for key, w in rebuilt.edges.items():
        assert state.graph.edges[key] == pytest.approx(w, abs=1e-9)


def test_graph_rejects_self_loops():
    g = WeightedGraph(3)
    with pytest.raises(ValueError):
        g.add_weight(2, 2, 1.0)


def test_eps_pruning():
    g = WeightedGraph(2)
    g.add_weight(1, 2, 1.0)
    g.add_weight(1, 2, -1.0 + 1e-12)
    assert g.edges == {}


def test_edge_list_round_trip(tmp_path):
    g = WeightedGraph(4)
    g.add_weight(1, 2, 0.75)
    g.add_weight(3, 4, 1.25)
    path = tmp_path / "edges.txt"
    with open(path, "w") as fp:
        write_edge_list(g, fp)
    with open(path) as fp:
        again = read_edge_list(fp)
    assert again.edges == g.edges


def test_dot_export(tmp_path):
    g = WeightedGraph(2)
    g.add_weight(1, 2, 2.0)
    path = tmp_path / "g.dot"
    with open(path, "w") as fp:
        write_dot(g, fp)
    text = path.read_text()
    assert text.startswith("graph vig {") and "1 -- 2 [weight=2.0];" in text


def test_csr_symmetry():
    g = WeightedGraph(4)
    g.add_weight(1, 2, 1.0)
    g.add_weight(2, 3, 2.0)
    indptr, indices, weights = g.csr()
    assert list(indptr) == [0, 1, 3, 4, 4]
    assert math.isclose(weights.sum(), 6.0)
