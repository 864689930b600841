"""Directed edge prior matrices: uniform, mutual information, LLM-aggregated, combined."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bayesnet import DiscreteDataset

KINDS = ("UR", "MI", "LLM", "combined")
SUM_TOL = 1e-9
MI_NEGATIVE_DUST = 1e-12


class ResponseCoverageError(ValueError):
    pass


@dataclass(frozen=True)
class QueryResponse:
    """Outcome probabilities for query (i, j): a = i->j, b = j->i, c = neither."""

    i: int
    j: int
    verb: str
    p_a: float
    p_b: float
    p_c: float = 0.0

    def __post_init__(self):
        probs = (self.p_a, self.p_b, self.p_c)
        if min(probs) < 0 or max(probs) > 1:
            raise ValueError(f"probabilities outside [0, 1]: {probs}")
        if abs(sum(probs) - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {sum(probs)!r}")
        if self.i == self.j:
            raise ValueError("query on a self-pair")


@dataclass
class PriorMatrix:
    p: np.ndarray
    kind: str
    no_edge: np.ndarray | None = None
    verb: str = ""
    model: str = ""
    traits: str = ""

    def __post_init__(self):
        self.p = np.array(self.p, dtype=np.float64)
        if self.p.ndim != 2 or self.p.shape[0] != self.p.shape[1]:
            raise ValueError("prior matrix must be square")
        if self.kind not in KINDS:
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if np.any(np.diag(self.p) != 0):
            raise ValueError("diagonal must be zero")
        if np.any(self.p < 0):
            raise ValueError("prior masses must be nonnegative")
        if self.no_edge is not None:
            self.no_edge = np.array(self.no_edge, dtype=np.float64)

    @property
    def d(self) -> int:
        return self.p.shape[0]


def uniform_prior(d: int) -> PriorMatrix:
    """Constant 1/3 matrix: every direction and the no-edge outcome equally likely."""
    if d < 2:
        raise ValueError("d must be >= 2")
    off = 1.0 - np.eye(d)
    return PriorMatrix(off / 3.0, "UR", no_edge=off / 3.0)


def random_uniform_prior(d: int, rng: np.random.Generator) -> PriorMatrix:
    """i.i.d. Uniform(0, 1) directed entries; the stochastic greedy baseline."""
    p = rng.random((d, d))
    np.fill_diagonal(p, 0.0)
    return PriorMatrix(p, "UR")


def uniform_responses(d: int, verb: str = "") -> list[QueryResponse]:
    """Responses of an expert that is indifferent between all three outcomes."""
    third = 1.0 / 3.0
    return [
        QueryResponse(i, j, verb, third, third, 1.0 - 2 * third)
        for i in range(d)
        for j in range(d)
        if i != j
    ]


def response_table(responses: Iterable[QueryResponse], d: int) -> np.ndarray:
    """Stack responses into a (d, d, 3) array indexed by (i, j, outcome)."""
    table = np.full((d, d, 3), np.nan)
    for r in responses:
        if not (0 <= r.i < d and 0 <= r.j < d):
            raise ResponseCoverageError(f"pair ({r.i}, {r.j}) out of range")
        if not np.isnan(table[r.i, r.j, 0]):
            raise ResponseCoverageError(f"duplicate response for pair ({r.i}, {r.j})")
        table[r.i, r.j] = (r.p_a, r.p_b, r.p_c)
    missing = [(i, j) for i in range(d) for j in range(d) if i != j and np.isnan(table[i, j, 0])]
    if missing:
        raise ResponseCoverageError(f"missing responses for pairs {missing[:5]}")
    return table


def aggregate_llm_prior(
    responses: Sequence[QueryResponse], d: int, model: str = "", traits: str = ""
) -> PriorMatrix:
    """Average the two query orientations of every pair.

    ``P[i, j] = (a(i, j) + b(j, i)) / 2`` and the no-edge mass is the mean of
    both ``c`` outcomes.
    """
    table = response_table(responses, d)
    a, b, c = table[..., 0], table[..., 1], table[..., 2]
    p = (a + b.T) / 2.0
    no_edge = (c + c.T) / 2.0
    np.fill_diagonal(p, 0.0)
    np.fill_diagonal(no_edge, 0.0)
    verbs = sorted({r.verb for r in responses})
    return PriorMatrix(p, "LLM", no_edge=no_edge, verb=",".join(verbs), model=model, traits=traits)


def mutual_information(x: np.ndarray, y: np.ndarray, rx: int, ry: int) -> float:
    """Plug-in mutual information (nats) of two discrete columns."""
    n = x.shape[0]
    joint = np.bincount(x * ry + y, minlength=rx * ry).reshape(rx, ry) / n
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nz = joint > 0
    outer = np.outer(px, py)
    mi = float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz])))
    if mi < 0:
        if mi < -MI_NEGATIVE_DUST:
            raise FloatingPointError(f"plug-in MI {mi!r} below tolerance")
        mi = 0.0
    return mi


def mi_prior(data: DiscreteDataset) -> PriorMatrix:
    """Pairwise plug-in MI; symmetric by construction."""
    if data.n < 1:
        raise ValueError("empty dataset")
    d = data.d
    p = np.zeros((d, d))
    card = data.cardinalities
    for i in range(d):
        for j in range(i + 1, d):
            v = mutual_information(data.values[:, i], data.values[:, j], int(card[i]), int(card[j]))
            p[i, j] = p[j, i] = v
    return PriorMatrix(p, "MI")


def combine_hadamard(mi: PriorMatrix, llm: PriorMatrix) -> PriorMatrix:
    if mi.d != llm.d:
        raise ValueError(f"dimension mismatch: {mi.d} vs {llm.d}")
    return PriorMatrix(mi.p * llm.p, "combined", verb=llm.verb, model=llm.model, traits=llm.traits)


# --- serialization ---------------------------------------------------------

def dumps_prior(prior: PriorMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    buf.write("# ")
    w.writerow([prior.kind, prior.d, prior.verb, prior.model, prior.traits])
    for row in prior.p:
        w.writerow([repr(float(x)) for x in row])
    if prior.no_edge is not None:
        buf.write("# no_edge\n")
        for i in range(prior.d - 1):
            w.writerow([repr(float(x)) for x in prior.no_edge[i, i + 1 :]])
    return buf.getvalue()


def loads_prior(text: str) -> PriorMatrix:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError("missing prior header line")
    kind, d, verb, model, traits = next(csv.reader([lines[0][2:]]))
    d = int(d)
    rows = list(csv.reader(lines[1 : 1 + d]))
    p = np.array([[float(x) for x in r] for r in rows])
    no_edge = None
    rest = lines[1 + d :]
    if rest and rest[0].strip() == "# no_edge":
        no_edge = np.zeros((d, d))
        for i, r in enumerate(csv.reader(rest[1:d])):
            vals = [float(x) for x in r]
            no_edge[i, i + 1 :] = vals
            no_edge[i + 1 :, i] = vals
    return PriorMatrix(p, kind, no_edge=no_edge, verb=verb, model=model, traits=traits)


def save_prior(prior: PriorMatrix, path: str | Path) -> None:
    Path(path).write_text(dumps_prior(prior))


def load_prior(path: str | Path) -> PriorMatrix:
    return loads_prior(Path(path).read_text())
