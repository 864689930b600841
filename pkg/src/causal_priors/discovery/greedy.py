from __future__ import annotations

import numpy as np

from ..graph import Dag
from ..priors import PriorMatrix
from .state import BitsetDag


def greedy_top_m(prior: PriorMatrix, m: int, rng: np.random.Generator, d: int | None = None) -> Dag:
    """Add edges in descending prior order, skipping any that would close a cycle.

    Exact ties are ordered uniformly at random by ``rng``. Any maximal DAG on d
    nodes has d(d-1)/2 edges, so every ``m`` up to that bound is reachable.
    """
    d = prior.d if d is None else d
    if d != prior.d:
        raise ValueError(f"prior has d={prior.d}, requested d={d}")
    if not 1 <= m <= d * (d - 1) // 2:
        raise ValueError(f"m={m} unreachable: an acyclic graph on {d} nodes has at most {d * (d - 1) // 2} edges")
    rows, cols = np.nonzero(~np.eye(d, dtype=bool))
    vals = prior.p[rows, cols]
    order = np.lexsort((rng.random(vals.shape[0]), -vals))
    state = BitsetDag(d)
    for k in order:
        i, j = int(rows[k]), int(cols[k])
        if state.can_add(i, j):
            state.add(i, j)
            if state.m == m:
                break
    return state.to_dag()
