import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_priors.graph import CycleError, Dag, InvalidEdgeError, edge_partition, shd, would_create_cycle


@st.composite
def dags(draw, max_d=6):
    d = draw(st.integers(1, max_d))
    order = draw(st.permutations(range(d)))
    pairs = [(order[a], order[b]) for a in range(d) for b in range(a + 1, d)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Dag(d, frozenset(p for p, k in zip(pairs, keep) if k))


def shd_brute(g: Dag, truth: Dag) -> int:
    # one unit per unordered pair whose (absent / i->j / j->i) state differs
    total = 0
    for i, j in itertools.combinations(range(g.d), 2):
        def state(h):
            return (i, j) in h.edges, (j, i) in h.edges
        total += state(g) != state(truth)
    return total


def test_construction_rejects_cycles_and_bad_edges():
    with pytest.raises(CycleError):
        Dag(3, frozenset({(0, 1), (1, 2), (2, 0)}))
    with pytest.raises(InvalidEdgeError):
        Dag(2, frozenset({(0, 0)}))
    with pytest.raises(InvalidEdgeError):
        Dag(2, frozenset({(0, 2)}))


def test_would_create_cycle_examples():
    g = Dag(3, frozenset({(0, 1), (1, 2)}))
    assert would_create_cycle(g, (2, 0))
    assert not would_create_cycle(g, (0, 2))
    with pytest.raises(InvalidEdgeError):
        would_create_cycle(g, (1, 1))
    with pytest.raises(InvalidEdgeError):
        would_create_cycle(g, (0, 1))


def test_add_edge_returns_new_graph():
    g = Dag(3)
    h = g.add_edge((0, 1))
    assert g.m == 0 and h.m == 1
    with pytest.raises(CycleError):
        h.add_edge((1, 0))


def test_shd_reversal_counts_once():
    truth = Dag(3, frozenset({(0, 1), (1, 2)}))
    assert shd(truth, truth) == 0
    assert shd(Dag(3, frozenset({(1, 0), (1, 2)})), truth) == 1
    assert shd(Dag(3), truth) == 2
    assert shd(Dag(3, frozenset({(0, 1), (1, 2), (0, 2)})), truth) == 1


def test_edge_partition_counts():
    truth = Dag(4, frozenset({(0, 1), (2, 3)}))
    part = edge_partition(truth)
    assert set(part.true_edges) == {(0, 1), (2, 3)}
    assert set(part.reverse_edges) == {(1, 0), (3, 2)}
    assert len(part.non_edges) == 4 * 3 - 4


def test_shd_brute_force_all_small_graphs():
    # every DAG pair on up to 3 nodes, plus a sample on 4
    for d in (2, 3):
        pairs = [(i, j) for i in range(d) for j in range(d) if i != j]
        graphs = []
        for bits in itertools.product([0, 1], repeat=len(pairs)):
            try:
                graphs.append(Dag(d, frozenset(p for p, b in zip(pairs, bits) if b)))
            except CycleError:
                pass
        for g in graphs:
            for h in graphs:
                assert shd(g, h) == shd_brute(g, h)


@given(dags(max_d=4), dags(max_d=4))
def test_shd_matches_brute_force(g, h):
    if g.d != h.d:
        h = Dag(g.d, frozenset(e for e in h.edges if max(e) < g.d))
    assert shd(g, h) == shd_brute(g, h)


@given(dags(), dags())
def test_shd_is_a_metric(g, h):
    h = Dag(g.d, frozenset(e for e in h.edges if max(e) < g.d))
    assert shd(g, g) == 0
    assert shd(g, h) == shd(h, g)
    empty = Dag(g.d)
    assert shd(g, h) <= shd(g, empty) + shd(empty, h)


@given(dags())
def test_topological_order_respects_edges(g):
    pos = {v: k for k, v in enumerate(g.topological_order())}
    assert all(pos[i] < pos[j] for i, j in g.edges)


@settings(max_examples=50)
@given(dags(), st.integers(0, 10_000))
def test_cycle_check_agrees_with_closure(g, seed):
    rng = np.random.default_rng(seed)
    i, j = rng.choice(g.d, 2, replace=False) if g.d > 1 else (0, 0)
    if i == j or (int(i), int(j)) in g.edges:
        return
    a = g.adjacency().astype(bool)
    reach = a.copy()
    for k in range(g.d):
        reach |= reach[:, [k]] & reach[[k], :]
    assert would_create_cycle(g, (int(i), int(j))) == bool(reach[j, i])
