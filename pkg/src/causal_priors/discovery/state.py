"""Bitset graph state with incremental reachability, for hot search loops."""
from __future__ import annotations

from ..graph import Dag, Edge


def bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class BitsetDag:
    """Mutable DAG holding each node's parent set and descendant set as int bitsets."""

    __slots__ = ("d", "parents", "desc", "m")

    def __init__(self, d: int):
        self.d = d
        self.parents = [0] * d
        self.desc = [0] * d
        self.m = 0

    @classmethod
    def from_dag(cls, g: Dag) -> "BitsetDag":
        s = cls(g.d)
        for v in g.topological_order():
            for p in g.parents(v):
                s.add(p, v)
        return s

    def copy(self) -> "BitsetDag":
        s = BitsetDag.__new__(BitsetDag)
        s.d = self.d
        s.parents = self.parents[:]
        s.desc = self.desc[:]
        s.m = self.m
        return s

    def can_add(self, i: int, j: int) -> bool:
        # absent, not a self-loop, and j does not already reach i
        return i != j and not (self.parents[j] >> i) & 1 and not (self.desc[j] >> i) & 1

    def add(self, i: int, j: int) -> None:
        """Insert i -> j; the caller guarantees ``can_add(i, j)``."""
        self.parents[j] |= 1 << i
        desc = self.desc
        down = desc[j] | (1 << j)
        bit_i = 1 << i
        desc[i] |= down
        for a in range(self.d):
            if desc[a] & bit_i:
                desc[a] |= down
        self.m += 1

    def valid_actions(self) -> list[Edge]:
        d = self.d
        parents, desc = self.parents, self.desc
        out = []
        for j in range(d):
            blocked = parents[j] | desc[j] | (1 << j)
            for i in range(d):
                if not (blocked >> i) & 1:
                    out.append((i, j))
        out.sort()
        return out

    def to_dag(self) -> Dag:
        return Dag(self.d, frozenset((p, j) for j in range(self.d) for p in bits(self.parents[j])))
