import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_priors.bayesnet import DiscreteDataset, forward_sample, load_network
from causal_priors.graph import CycleError, Dag
from causal_priors.scoring import BicScorer, bic_score, family_score, score_delta


def family_oracle(values, cards, child, parents):
    """Count by dictionary, row by row; q is the full parent-cardinality product."""
    n = len(values)
    joint = Counter()
    marg = Counter()
    for row in values:
        cfg = tuple(row[p] for p in parents)
        joint[cfg, row[child]] += 1
        marg[cfg] += 1
    ll = sum(c * math.log(c / marg[cfg]) for (cfg, _), c in joint.items())
    q = math.prod(cards[p] for p in parents)
    return -ll + 0.5 * math.log(n) * q * (cards[child] - 1)


def random_data(rng, d, n, max_card=3):
    cards = rng.integers(2, max_card + 1, size=d)
    values = np.column_stack([rng.integers(0, c, size=n) for c in cards])
    # mix in some dependence
    if d > 1:
        values[:, 1] = np.where(rng.random(n) < 0.7, values[:, 0] % cards[1], values[:, 1])
    return DiscreteDataset(values, cards)


def all_dags(d):
    pairs = [(i, j) for i in range(d) for j in range(d) if i != j]
    for bits in itertools.product([0, 1], repeat=len(pairs)):
        try:
            yield Dag(d, frozenset(p for p, b in zip(pairs, bits) if b))
        except CycleError:
            continue


def test_single_binary_family_by_hand():
    values = np.array([[0]] * 600 + [[1]] * 400)
    data = DiscreteDataset(values, [2])
    expected = -(600 * math.log(0.6) + 400 * math.log(0.4)) + math.log(1000) / 2
    assert family_score(0, [], data) == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(676.49, abs=0.05)


def test_deterministic_child_is_pure_penalty():
    data = DiscreteDataset(np.zeros((500, 1), dtype=int), [3])
    assert family_score(0, [], data) == pytest.approx(math.log(500) / 2 * 2)


def test_unobserved_parent_configs_still_penalized():
    # parent has 4 states but only two occur
    rng = np.random.default_rng(0)
    values = np.column_stack([rng.integers(0, 2, 300), rng.integers(0, 2, 300)])
    data = DiscreteDataset(values, [4, 2])
    assert family_score(1, [0], data) == pytest.approx(family_oracle(values, [4, 2], 1, [0]))


def test_strong_edge_beats_empty():
    rng = np.random.default_rng(1)
    x = rng.integers(0, 2, 1000)
    y = np.where(rng.random(1000) < 0.9, x, 1 - x)
    data = DiscreteDataset(np.column_stack([x, y]), [2, 2])
    assert bic_score(Dag(2, frozenset({(0, 1)})), data) < bic_score(Dag(2), data)


def test_independent_parent_is_penalized():
    rng = np.random.default_rng(2)
    data = DiscreteDataset(rng.integers(0, 3, size=(5000, 2)), [3, 3])
    assert score_delta(Dag(2), (0, 1), data) > 0


@pytest.mark.parametrize("d", [2, 3, 4])
def test_decomposability_against_oracle(d):
    rng = np.random.default_rng(d)
    data = random_data(rng, d, 150)
    scorer = BicScorer(data, cache=False)
    vals = data.values.tolist()
    cards = data.cardinalities.tolist()
    graphs = list(all_dags(d))
    if d == 4:
        graphs = [graphs[k] for k in rng.choice(len(graphs), 60, replace=False)]
    for g in graphs:
        oracle = math.fsum(family_oracle(vals, cards, v, sorted(g.parents(v))) for v in range(d))
        assert scorer.score(g) == pytest.approx(oracle, rel=1e-12, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_delta_matches_rescoring_and_cache_is_transparent(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 6))
    data = random_data(rng, d, int(rng.integers(20, 200)))
    cached, plain = BicScorer(data), BicScorer(data, cache=False)
    order = rng.permutation(d)
    g = Dag(d)
    for a in range(d):
        for b in range(a + 1, d):
            if rng.random() < 0.4:
                e = (int(order[a]), int(order[b]))
                delta = cached.delta(g, e)
                h = g.add_edge(e)
                assert delta == pytest.approx(cached.score(h) - cached.score(g), abs=1e-9)
                g = h
    assert cached.score(g) == plain.score(g)
    assert cached.empty_score() == plain.empty_score()


def test_second_query_is_a_cache_hit():
    data = random_data(np.random.default_rng(5), 3, 100)
    scorer = BicScorer(data)
    first = scorer.delta(Dag(3), (0, 1))
    hits = scorer.hits
    assert scorer.delta(Dag(3), (0, 1)) == first
    assert scorer.hits == hits + 2


def test_insertion_order_does_not_matter():
    data = random_data(np.random.default_rng(6), 3, 100)
    a = Dag(3).add_edge((0, 1)).add_edge((1, 2))
    b = Dag(3).add_edge((1, 2)).add_edge((0, 1))
    assert bic_score(a, data) == bic_score(b, data)


def test_larger_parent_cardinality_raises_penalty():
    # identical data columns, declared cardinalities differ only in the parent
    rng = np.random.default_rng(7)
    values = rng.integers(0, 2, size=(400, 2))
    small = DiscreteDataset(values, [2, 2])
    big = DiscreteDataset(values, [5, 2])
    assert family_score(1, [0], big) > family_score(1, [0], small)


@pytest.mark.parametrize("name", ["asia", "child", "insurance"])
def test_truth_scores_below_empty(name):
    bn = load_network(name)
    data = forward_sample(bn, 1000, 0)
    scorer = BicScorer(data)
    assert scorer.score(bn.graph) <= scorer.empty_score()


def test_delta_rejects_cycles():
    data = random_data(np.random.default_rng(8), 2, 50)
    with pytest.raises(CycleError):
        score_delta(Dag(2, frozenset({(0, 1)})), (1, 0), data)
