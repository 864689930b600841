"""Prior-quality metrics computed against a ground-truth graph."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Dag, edge_partition
from .priors import PriorMatrix, QueryResponse, response_table

EPS = 1e-9


@dataclass(frozen=True)
class MetricsReport:
    fco: float
    tere: float
    tene: float
    lod: float | None = None
    floored: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {"fco": self.fco, "tere": self.tere, "tene": self.tene, "lod": self.lod}


def fco(p: np.ndarray, truth: Dag) -> float:
    """Fraction of true edges whose forward mass beats the reverse; ties score 1/2."""
    if truth.m == 0:
        raise ValueError("truth graph has no edges")
    total = 0.0
    for i, j in truth.edges:
        if p[i, j] > p[j, i]:
            total += 1.0
        elif p[i, j] == p[j, i]:
            total += 0.5
    return total / truth.m


def tere(p: np.ndarray, truth: Dag, eps: float = EPS) -> tuple[float, bool]:
    """Sum of forward/reverse ratios over true edges, and whether flooring fired."""
    if truth.m == 0:
        raise ValueError("truth graph has no edges")
    floored = False
    terms = []
    for i, j in sorted(truth.edges):
        den = p[j, i]
        if den < eps:
            den, floored = eps, True
        terms.append(p[i, j] / den)
    return math.fsum(terms), floored


def tene(p: np.ndarray, truth: Dag, eps: float = EPS) -> tuple[float, bool]:
    if truth.m == 0:
        raise ValueError("truth graph has no edges")
    part = edge_partition(truth)
    num = math.fsum(p[i, j] for i, j in sorted(part.true_edges))
    den = math.fsum(p[i, j] for i, j in sorted(part.non_edges))
    if den < eps:
        return num / eps, True
    return num / den, False


def lod(responses: Sequence[QueryResponse], d: int) -> float:
    """Mean disagreement between the two orientations of each query.

    Uses the raw, unaveraged per-orientation probabilities.
    """
    t = response_table(responses, d)
    a, b = t[..., 0], t[..., 1]
    terms = [
        abs(a[i, j] - b[j, i]) + abs(a[j, i] - b[i, j])
        for i in range(d)
        for j in range(d)
        if i != j
    ]
    return math.fsum(terms) / (2 * d * (d - 1))


def compute_metrics(
    prior: PriorMatrix,
    truth: Dag,
    raw: Sequence[QueryResponse] | None = None,
    eps: float = EPS,
) -> MetricsReport:
    if prior.d != truth.d:
        raise ValueError(f"dimension mismatch: prior {prior.d}, truth {truth.d}")
    if truth.m == 0:
        raise ValueError("truth graph has no edges")
    t, t_floor = tere(prior.p, truth, eps)
    n, n_floor = tene(prior.p, truth, eps)
    floored = tuple(name for name, hit in (("tere", t_floor), ("tene", n_floor)) if hit)
    return MetricsReport(
        fco=fco(prior.p, truth),
        tere=t,
        tene=n,
        lod=None if raw is None else lod(raw, truth.d),
        floored=floored,
    )
