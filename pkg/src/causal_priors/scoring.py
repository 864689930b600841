"""Decomposable BIC score (minimised) for discrete data, with family caching."""
from __future__ import annotations

import math
from typing import Iterable, NamedTuple

import numpy as np

from .bayesnet import DiscreteDataset
from .graph import Dag, Edge, CycleError, would_create_cycle

# Dense contingency tables below this many cells, sparse (np.unique) above.
_DENSE_CELLS = 1 << 20


class FamilyKey(NamedTuple):
    child: int
    parents: tuple[int, ...]


def _mask(parents: Iterable[int]) -> int:
    m = 0
    for p in parents:
        m |= 1 << p
    return m


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _family_from_columns(cols, cards, n: int, child: int, parents: list[int]) -> float:
    r = int(cards[child])
    q = 1
    cfg = None
    for p in parents:
        q *= int(cards[p])
        cfg = cols[p].copy() if cfg is None else cfg * int(cards[p]) + cols[p]
    if cfg is None:
        counts = np.bincount(cols[child], minlength=r)[None, :]
    elif q * r <= _DENSE_CELLS:
        counts = np.bincount(cfg * r + cols[child], minlength=q * r).reshape(q, r)
    else:
        _, inv = np.unique(cfg, return_inverse=True)
        counts = np.zeros((inv.max() + 1, r), dtype=np.int64)
        np.add.at(counts, (inv, cols[child]), 1)
    nz = counts[counts > 0].astype(np.float64)
    row = counts.sum(axis=1)
    row = row[row > 0].astype(np.float64)
    loglik = float(np.sum(nz * np.log(nz)) - np.sum(row * np.log(row)))
    return -loglik + 0.5 * math.log(n) * q * (r - 1)


def family_score(child: int, parents: Iterable[int], data: DiscreteDataset) -> float:
    """BIC contribution of one family: ``-LL + (ln n / 2) q (r - 1)``.

    ``q`` is the full product of parent cardinalities, whether or not every
    parent configuration occurs in the data.
    """
    parents = sorted(set(parents))
    if data.n == 0:
        raise ValueError("empty dataset")
    if child in parents:
        raise ValueError("child cannot be its own parent")
    for v in [child, *parents]:
        if not 0 <= v < data.d:
            raise IndexError(f"variable {v} out of range")
    cols = [data.values[:, i] for i in range(data.d)]
    return _family_from_columns(cols, data.cardinalities, data.n, child, parents)


class BicScorer:
    """BIC over a fixed dataset; family scores are memoised by (child, parents)."""

    def __init__(self, data: DiscreteDataset, cache: bool = True):
        if data.n == 0:
            raise ValueError("empty dataset")
        self.data = data
        self.d = data.d
        self._cols = [np.ascontiguousarray(data.values[:, i]) for i in range(data.d)]
        self._cards = data.cardinalities.tolist()
        self._n = data.n
        self.use_cache = cache
        self._cache: dict[tuple[int, int], float] = {}
        self.hits = 0
        self.misses = 0

    def family_mask(self, child: int, mask: int) -> float:
        key = (child, mask)
        if self.use_cache:
            val = self._cache.get(key)
            if val is not None:
                self.hits += 1
                return val
        self.misses += 1
        val = _family_from_columns(self._cols, self._cards, self._n, child, _bits(mask))
        if self.use_cache:
            self._cache.setdefault(key, val)
        return val

    def family(self, child: int, parents: Iterable[int]) -> float:
        parents = set(parents)
        if child in parents:
            raise ValueError("child cannot be its own parent")
        return self.family_mask(child, _mask(parents))

    def score(self, g: Dag) -> float:
        if g.d != self.d:
            raise ValueError(f"graph has d={g.d}, data has d={self.d}")
        masks = [0] * self.d
        for i, j in g.edges:
            masks[j] |= 1 << i
        return math.fsum(self.family_mask(i, masks[i]) for i in range(self.d))

    def delta(self, g: Dag, edge: Edge) -> float:
        """Score change from adding ``edge``; only the child's family is rescored."""
        if g.d != self.d:
            raise ValueError(f"graph has d={g.d}, data has d={self.d}")
        if would_create_cycle(g, edge):
            raise CycleError(f"{edge[0]}->{edge[1]} would create a cycle")
        i, j = edge
        mask = _mask(g.parents(j))
        return self.family_mask(j, mask | (1 << i)) - self.family_mask(j, mask)

    def empty_score(self) -> float:
        return math.fsum(self.family_mask(i, 0) for i in range(self.d))


def bic_score(g: Dag, data: DiscreteDataset, scorer: BicScorer | None = None) -> float:
    return (scorer or BicScorer(data)).score(g)


def score_delta(g: Dag, edge: Edge, data: DiscreteDataset, scorer: BicScorer | None = None) -> float:
    return (scorer or BicScorer(data)).delta(g, edge)
