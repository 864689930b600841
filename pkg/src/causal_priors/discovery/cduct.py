"""UCT search over edge additions with a prior-softmax rollout policy.

Each outer step runs one tree search from the committed graph, commits the
root action with the best mean reward and stops once no root action has a
positive mean. A simulation's reward is the largest score improvement seen
anywhere along its path (tree part and rollout), relative to the committed
graph and divided by the empty graph's score.
"""
from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Sequence

import numpy as np

from ..bayesnet import DiscreteDataset
from ..graph import Dag, Edge
from ..priors import PriorMatrix
from ..scoring import BicScorer
from .state import BitsetDag

TAU_GRID = (1e-5, 1e-4, 5e-4, 1e-3, 2.5e-3, 5e-3, 7.5e-3, 1e-2, 2.5e-2, 5e-2, 7.5e-2, 0.1, 0.25, 0.5, 1.0)
BUDGET_GRID = (1, 10, 100)

_MAX_REJECTIONS = 16


@dataclass(frozen=True)
class SearchConfig:
    c_p: float = 0.025
    horizon: int = 16
    budget_multiplier: int = 1
    tau: float = 0.1
    seed: int = 0
    # total simulations per decision, overriding multiplier x |root actions|
    fixed_simulations: int | None = None

    def __post_init__(self):
        if self.c_p < 0:
            raise ValueError("c_p must be >= 0")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.budget_multiplier < 1:
            raise ValueError("budget_multiplier must be >= 1")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if self.fixed_simulations is not None and self.fixed_simulations < 1:
            raise ValueError("fixed_simulations must be >= 1")

    def as_dict(self) -> dict:
        return {
            "c_p": self.c_p,
            "horizon": self.horizon,
            "budget_multiplier": self.budget_multiplier,
            "tau": self.tau,
            "seed": self.seed,
            "fixed_simulations": self.fixed_simulations,
        }


@dataclass(frozen=True)
class SearchState:
    graph: Dag
    valid_actions: tuple[Edge, ...]

    @classmethod
    def from_graph(cls, g: Dag) -> "SearchState":
        return cls(g, tuple(BitsetDag.from_dag(g).valid_actions()))


def softmax_probabilities(values: np.ndarray, tau: float) -> np.ndarray:
    z = (np.asarray(values, dtype=np.float64) - np.max(values)) / tau
    w = np.exp(z)
    return w / w.sum()


def simulation_policy_sample(
    state: SearchState, prior: PriorMatrix, tau: float, rng: np.random.Generator
) -> Edge:
    """Draw one valid action with probability softmax(prior / tau) over the action set."""
    if not state.valid_actions:
        raise ValueError("no valid actions")
    if not tau > 0:
        raise ValueError("tau must be > 0")
    acts = np.array(state.valid_actions)
    probs = softmax_probabilities(prior.p[acts[:, 0], acts[:, 1]], tau)
    k = rng.choice(len(acts), p=probs)
    return tuple(int(x) for x in acts[k])


class RolloutSampler:
    """Softmax sampling over a changing valid-action set.

    Draws from the fixed softmax over all ordered pairs and rejects invalid
    pairs; after a bounded number of rejections it samples the restricted
    softmax directly. Conditioning on acceptance leaves the restricted law
    unchanged, so the output distribution is exact.
    """

    def __init__(self, prior: np.ndarray, tau: float):
        d = prior.shape[0]
        self.d = d
        self.prior = prior
        self.tau = tau
        self.pairs = [(i, j) for i in range(d) for j in range(d) if i != j]
        vals = [float(prior[i, j]) for i, j in self.pairs]
        mx = max(vals)
        self.cum = list(accumulate(math.exp((v - mx) / tau) for v in vals))
        self.total = self.cum[-1]
        # pairs in decreasing prior order, for the direct sampler
        order = np.argsort(-np.asarray(vals), kind="stable")
        self._ri = np.array([self.pairs[k][0] for k in order], dtype=np.int64)
        self._rj = np.array([self.pairs[k][1] for k in order], dtype=np.int64)
        self._rv = np.asarray(vals)[order]
        self._ranked = [self.pairs[k] for k in order]

    def exact(self, state: BitsetDag, rnd: random.Random) -> Edge | None:
        """Sample the softmax restricted to ``state``'s valid actions directly."""
        if self.d > 62:
            return self._exact_slow(state, rnd)
        blocked = np.array([p | q for p, q in zip(state.parents, state.desc)], dtype=np.int64)
        ok = ((blocked[self._rj] >> self._ri) & 1) == 0
        idx = ok.nonzero()[0]
        if idx.size == 0:
            return None
        v = self._rv[idx]
        cum = np.exp((v - v[0]) / self.tau).cumsum()
        k = int(np.searchsorted(cum, rnd.random() * cum[-1], side="right"))
        return self._ranked[idx[min(k, idx.size - 1)]]

    def _exact_slow(self, state: BitsetDag, rnd: random.Random) -> Edge | None:
        acts = state.valid_actions()
        if not acts:
            return None
        vals = [float(self.prior[i, j]) for i, j in acts]
        mx = max(vals)
        cum = list(accumulate(math.exp((v - mx) / self.tau) for v in vals))
        k = bisect_right(cum, rnd.random() * cum[-1])
        return acts[min(k, len(acts) - 1)]

    def sample(self, state: BitsetDag, rnd: random.Random) -> Edge | None:
        cum, total, pairs = self.cum, self.total, self.pairs
        last = len(pairs) - 1
        for _ in range(_MAX_REJECTIONS):
            k = bisect_right(cum, rnd.random() * total)
            i, j = pairs[min(k, last)]
            if state.can_add(i, j):
                return i, j
        return self.exact(state, rnd)


class _Node:
    """Tree node; per-child visit counts and reward sums live in parallel arrays."""

    __slots__ = ("untried", "acts", "kids", "cn", "cw", "n")

    def __init__(self):
        self.untried: list[Edge] | None = None
        self.acts: list[Edge] = []
        self.kids: list[_Node] = []
        self.cn: np.ndarray | None = None
        self.cw: np.ndarray | None = None
        self.n = 0

    def open(self, actions: list[Edge]) -> None:
        self.untried = actions
        self.cn = np.zeros(len(actions))
        self.cw = np.zeros(len(actions))


@dataclass
class SearchResult:
    graph: Dag
    score: float
    trajectory: list[Edge] = field(default_factory=list)
    trajectory_scores: list[float] = field(default_factory=list)
    simulations: int = 0


class CdUctSearch:
    def __init__(self, data: DiscreteDataset, prior: PriorMatrix, config: SearchConfig, scorer: BicScorer | None = None):
        if data.n == 0:
            raise ValueError("empty dataset")
        if prior.d != data.d:
            raise ValueError(f"prior has d={prior.d}, data has d={data.d}")
        self.data = data
        self.prior = prior
        self.config = config
        self.scorer = scorer or BicScorer(data)
        self.sampler = RolloutSampler(prior.p, config.tau)
        self.rnd = random.Random(config.seed)
        self.empty_score = self.scorer.empty_score()
        self.norm = abs(self.empty_score) or 1.0

    def _delta(self, state: BitsetDag, i: int, j: int) -> float:
        fam = self.scorer.family_mask
        pm = state.parents[j]
        return fam(j, pm | (1 << i)) - fam(j, pm)

    def _simulate(self, root: _Node, outer: BitsetDag, outer_score: float) -> None:
        cfg = self.config
        rnd = self.rnd
        horizon = cfg.horizon
        two_cp = 2.0 * cfg.c_p
        fam = self.scorer.family_mask
        state = outer.copy()
        parents = state.parents
        f = outer_score
        best = math.inf
        depth = 0
        node = root
        path: list[tuple[_Node, int]] = []
        # selection / expansion
        while True:
            if node.untried is None:
                node.open(state.valid_actions() if depth < horizon else [])
            untried = node.untried
            if untried:
                k = rnd.randrange(len(untried))
                untried[k], untried[-1] = untried[-1], untried[k]
                a = untried.pop()
                child = _Node()
                idx = len(node.kids)
                node.acts.append(a)
                node.kids.append(child)
            elif node.kids:
                k = len(node.kids)
                cn = node.cn[:k]
                ucb = node.cw[:k] / cn + two_cp * np.sqrt(2.0 * math.log(node.n) / cn)
                idx = int(ucb.argmax())
                a = node.acts[idx]
                child = node.kids[idx]
            else:
                break
            i, j = a
            pm = parents[j]
            f += fam(j, pm | (1 << i)) - fam(j, pm)
            state.add(i, j)
            depth += 1
            if f < best:
                best = f
            path.append((node, idx))
            node = child
            if child.n == 0:
                break
        # rollout
        if depth < horizon:
            sampler = self.sampler
            cum, total, pairs = sampler.cum, sampler.total, sampler.pairs
            last = len(pairs) - 1
            desc = state.desc
            random_ = rnd.random
            # valid sets only shrink along a rollout, so once rejection stalls
            # the rest of the rollout samples the restricted softmax directly
            direct = False
            while depth < horizon:
                if not direct:
                    for _ in range(_MAX_REJECTIONS):
                        k = bisect_right(cum, random_() * total)
                        if k > last:
                            k = last
                        i, j = pairs[k]
                        if not ((parents[j] | desc[j]) >> i) & 1:
                            break
                    else:
                        direct = True
                if direct:
                    a = sampler.exact(state, rnd)
                    if a is None:
                        break
                    i, j = a
                pm = parents[j]
                f += fam(j, pm | (1 << i)) - fam(j, pm)
                state.add(i, j)
                depth += 1
                if f < best:
                    best = f
        reward = (outer_score - best) / self.norm if best < math.inf else 0.0
        for nd, idx in path:
            nd.n += 1
            nd.cn[idx] += 1.0
            nd.cw[idx] += reward
        node.n += 1

    def decide(self, outer: BitsetDag, outer_score: float) -> tuple[Edge | None, float, int]:
        """Run one tree search; return (best root action, its mean reward, simulations)."""
        n_actions = len(outer.valid_actions())
        if n_actions == 0:
            return None, 0.0, 0
        sims = self.config.fixed_simulations or self.config.budget_multiplier * n_actions
        root = _Node()
        for _ in range(sims):
            self._simulate(root, outer, outer_score)
        k = len(root.kids)
        means = root.cw[:k] / root.cn[:k]
        top = float(means.max())
        ties = sorted(a for a, m in zip(root.acts, means) if m == top)
        return ties[self.rnd.randrange(len(ties))], top, sims

    def run(self) -> SearchResult:
        outer = BitsetDag(self.data.d)
        f = self.empty_score
        traj: list[Edge] = []
        scores = [f]
        best_len, best_f = 0, f
        total = 0
        while True:
            action, mean, sims = self.decide(outer, f)
            total += sims
            if action is None or mean <= 0:
                break
            f += self._delta(outer, *action)
            outer.add(*action)
            traj.append(action)
            scores.append(f)
            if f < best_f:
                best_len, best_f = len(traj), f
        graph = Dag(self.data.d, frozenset(traj[:best_len]))
        return SearchResult(graph, self.scorer.score(graph), traj, scores, total)


def cduct_search(
    data: DiscreteDataset,
    prior: PriorMatrix,
    config: SearchConfig,
    scorer: BicScorer | None = None,
) -> tuple[Dag, float]:
    """Search for a low-BIC DAG; deterministic for a fixed config seed.

    Returns the best-scoring graph on the committed path, so the result never
    scores worse than the empty graph.
    """
    res = CdUctSearch(data, prior, config, scorer).run()
    return res.graph, res.score
