"""Directed acyclic graphs over dense integer node indices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

Edge = tuple[int, int]


class InvalidEdgeError(ValueError):
    pass


class CycleError(ValueError):
    pass


def _check_endpoints(d: int, edge: Edge) -> None:
    i, j = edge
    if not (0 <= i < d and 0 <= j < d):
        raise InvalidEdgeError(f"edge {i}->{j} out of range for d={d}")
    if i == j:
        raise InvalidEdgeError(f"self-loop on node {i}")


def _reaches(adj: dict[int, set[int]], src: int, dst: int) -> bool:
    stack = [src]
    seen = {src}
    while stack:
        u = stack.pop()
        if u == dst:
            return True
        for w in adj.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


@dataclass(frozen=True)
class Dag:
    """Immutable DAG. ``add_edge`` returns a new graph."""

    d: int
    edges: frozenset[Edge] = frozenset()

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for e in edges:
            _check_endpoints(self.d, e)
        object.__setattr__(self, "edges", edges)
        if self._topological_order() is None:
            raise CycleError("edge set contains a directed cycle")

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> "Dag":
        adj = np.asarray(adj)
        rows, cols = np.nonzero(adj)
        return cls(adj.shape[0], frozenset(zip(rows.tolist(), cols.tolist())))

    @property
    def m(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self.edges))

    def __contains__(self, edge) -> bool:
        return tuple(edge) in self.edges

    def parents(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(a for a, b in self.edges if b == i))

    def children(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(b for a, b in self.edges if a == i))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.d, self.d), dtype=np.int8)
        for i, j in self.edges:
            a[i, j] = 1
        return a

    def _succ(self) -> dict[int, set[int]]:
        succ: dict[int, set[int]] = {}
        for i, j in self.edges:
            succ.setdefault(i, set()).add(j)
        return succ

    def _topological_order(self) -> list[int] | None:
        indeg = [0] * self.d
        succ = self._succ()
        for _, j in self.edges:
            indeg[j] += 1
        queue = [i for i in range(self.d) if indeg[i] == 0]
        order = []
        while queue:
            u = queue.pop(0)
            order.append(u)
            for w in sorted(succ.get(u, ())):
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
        return order if len(order) == self.d else None

    def topological_order(self) -> list[int]:
        # acyclicity is enforced at construction
        return self._topological_order()  # type: ignore[return-value]

    def would_create_cycle(self, edge: Edge) -> bool:
        return would_create_cycle(self, edge)

    def add_edge(self, edge: Edge) -> "Dag":
        if tuple(edge) in self.edges:
            raise InvalidEdgeError(f"edge {edge} already present")
        if would_create_cycle(self, edge):
            raise CycleError(f"adding {edge[0]}->{edge[1]} creates a cycle")
        return Dag(self.d, self.edges | {tuple(edge)})

    def add_edges(self, edges: Iterable[Edge]) -> "Dag":
        g = self
        for e in edges:
            g = g.add_edge(e)
        return g


def would_create_cycle(g: Dag, candidate: Edge) -> bool:
    """True iff adding ``candidate`` to ``g`` closes a directed cycle.

    Searches forward from the candidate's head for its tail; ``g`` is untouched.
    """
    _check_endpoints(g.d, candidate)
    i, j = candidate
    if (i, j) in g.edges:
        raise InvalidEdgeError(f"edge {i}->{j} already present")
    return _reaches(g._succ(), j, i)


@dataclass(frozen=True)
class EdgePartition:
    true_edges: frozenset[Edge]
    reverse_edges: frozenset[Edge]
    non_edges: frozenset[Edge]


def edge_partition(truth: Dag) -> EdgePartition:
    """Split all ordered pairs into true, reversed-true and non-edges."""
    true_edges = truth.edges
    reverse = frozenset((j, i) for i, j in true_edges)
    non = frozenset(
        (i, j)
        for i in range(truth.d)
        for j in range(truth.d)
        if i != j and (i, j) not in true_edges and (j, i) not in true_edges
    )
    return EdgePartition(true_edges, reverse, non)


def shd(g: Dag, truth: Dag) -> int:
    """Structural Hamming distance; a reversed edge costs 1."""
    if g.d != truth.d:
        raise ValueError(f"dimension mismatch: {g.d} vs {truth.d}")
    pairs = {frozenset(e) for e in g.edges} | {frozenset(e) for e in truth.edges}
    dist = 0
    for pair in pairs:
        i, j = sorted(pair)
        if ((i, j) in g.edges) != ((i, j) in truth.edges) or ((j, i) in g.edges) != (
            (j, i) in truth.edges
        ):
            dist += 1
    return dist
