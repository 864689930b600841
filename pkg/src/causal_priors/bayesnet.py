"""Discrete Bayesian networks: BIF parsing, ancestral sampling and variable metadata."""
from __future__ import annotations

import csv
import io
import logging
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import Dag

log = logging.getLogger(__name__)

ROW_TOL = 1e-9
RENORMALIZE_TOL = 1e-6

BUNDLED_NETWORKS = ("asia", "child", "insurance")


class BifSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


class MetadataError(ValueError):
    pass


@dataclass
class BayesNet:
    """Variables in declaration order; ``cpts[i]`` has shape ``(q_i, r_i)``.

    Parent configurations are enumerated in mixed radix over ``parents[i]``
    with the first listed parent varying slowest.
    """

    name: str
    names: list[str]
    states: list[list[str]]
    parents: list[tuple[int, ...]]
    cpts: list[np.ndarray]

    def __post_init__(self):
        for i, cpt in enumerate(self.cpts):
            q = int(np.prod([len(self.states[p]) for p in self.parents[i]], dtype=np.int64))
            if cpt.shape != (q, len(self.states[i])):
                raise ValueError(
                    f"CPT of {self.names[i]} has shape {cpt.shape}, expected {(q, len(self.states[i]))}"
                )
            if np.any(np.abs(cpt.sum(axis=1) - 1.0) > ROW_TOL):
                raise ValueError(f"CPT rows of {self.names[i]} do not sum to 1")
        self.graph = Dag(
            len(self.names),
            frozenset((p, i) for i, ps in enumerate(self.parents) for p in ps),
        )

    @property
    def d(self) -> int:
        return len(self.names)

    @property
    def cardinalities(self) -> np.ndarray:
        return np.array([len(s) for s in self.states], dtype=np.int64)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __eq__(self, other):
        if not isinstance(other, BayesNet):
            return NotImplemented
        return (
            self.names == other.names
            and self.states == other.states
            and self.parents == other.parents
            and all(np.array_equal(a, b) for a, b in zip(self.cpts, other.cpts))
        )


@dataclass(frozen=True)
class DiscreteDataset:
    values: np.ndarray  # (n, d) state indices
    cardinalities: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.int64)
        card = np.asarray(self.cardinalities, dtype=np.int64)
        if values.ndim != 2 or values.shape[1] != card.shape[0]:
            raise ValueError("values must be (n, d) with one cardinality per column")
        if values.size and (values.min() < 0 or np.any(values.max(axis=0) >= card)):
            raise ValueError("state index outside [0, r_i)")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "cardinalities", card)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"X{i}" for i in range(card.shape[0])))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class VariableMeta:
    index: int
    name: str
    description: str
    domain: str = ""


# --- BIF parsing -----------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<comment>//[^\n]*|/\*.*?\*/)|(?P<punct>[{}()\[\],;|])|(?P<word>[^\s{}()\[\],;|]+)",
    re.S,
)


def _tokenize(text: str):
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None:  # pragma: no cover - the word class matches everything else
            raise BifSyntaxError("unexpected character", line, pos - line_start + 1)
        kind = mt.lastgroup
        tok = mt.group()
        if kind in ("punct", "word"):
            yield tok, line, pos - line_start + 1
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = pos + tok.rfind("\n") + 1
        pos = mt.end()


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokenize(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def where(self):
        if self.i < len(self.toks):
            return self.toks[self.i][1:]
        if self.toks:
            return self.toks[-1][1], self.toks[-1][2]
        return 1, 1

    def fail(self, msg):
        raise BifSyntaxError(msg, *self.where())

    def next(self):
        if self.i >= len(self.toks):
            self.fail("unexpected end of input")
        tok = self.toks[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok):
        if self.peek() != tok:
            self.fail(f"expected {tok!r}, found {self.peek()!r}")
        return self.next()

    def word(self):
        tok = self.peek()
        if tok is None or tok in "{}()[],;|":
            self.fail(f"expected identifier, found {tok!r}")
        return self.next()

    def number(self):
        where = self.where()
        tok = self.word()
        try:
            return float(tok)
        except ValueError:
            raise BifSyntaxError(f"expected number, found {tok!r}", *where) from None

    def skip_property(self):
        while self.next() != ";":
            pass

    def word_list(self, close):
        items = [self.word()]
        while self.peek() == ",":
            self.next()
            items.append(self.word())
        self.expect(close)
        return items

    def numbers_until_semicolon(self):
        vals = [self.number()]
        while self.peek() == ",":
            self.next()
            vals.append(self.number())
        self.expect(";")
        return vals


def _clean_row(row: np.ndarray, var: str) -> np.ndarray:
    err = abs(row.sum() - 1.0)
    if err <= ROW_TOL:
        return row
    if err <= RENORMALIZE_TOL:
        warnings.warn(f"renormalizing CPT row of {var} (sum off by {err:.2e})", stacklevel=3)
        return row / row.sum()
    raise ValueError(f"CPT row of {var} sums to {row.sum():.9g}")


def parse_bif(text: str) -> BayesNet:
    """Parse a BIF document from the Bayesian Network Repository dialect."""
    p = _Parser(text)
    net_name = "unknown"
    names: list[str] = []
    states: dict[str, list[str]] = {}
    prob_blocks: list[tuple[str, list[str], list, tuple[int, int]]] = []

    while p.peek() is not None:
        kw = p.word()
        if kw == "network":
            net_name = p.word()
            p.expect("{")
            while p.peek() != "}":
                p.skip_property()
            p.expect("}")
        elif kw == "variable":
            var = p.word()
            if var in states:
                p.fail(f"variable {var!r} declared twice")
            p.expect("{")
            while p.peek() != "}":
                inner = p.word()
                if inner == "type":
                    if p.word() != "discrete":
                        p.fail("only discrete variables are supported")
                    p.expect("[")
                    k = int(p.number())
                    p.expect("]")
                    p.expect("{")
                    st = p.word_list("}")
                    p.expect(";")
                    if len(st) != k:
                        p.fail(f"variable {var!r} declares {k} states but lists {len(st)}")
                    states[var] = st
                elif inner == "property":
                    p.skip_property()
                else:
                    p.fail(f"unexpected {inner!r} in variable block")
            p.expect("}")
            if var not in states:
                p.fail(f"variable {var!r} has no type")
            names.append(var)
        elif kw == "probability":
            where = p.where()
            p.expect("(")
            child = p.word()
            parents: list[str] = []
            if p.peek() == "|":
                p.next()
                parents = p.word_list(")")
            else:
                p.expect(")")
            p.expect("{")
            entries = []
            while p.peek() != "}":
                if p.peek() == "(":
                    p.next()
                    cfg = p.word_list(")")
                    entries.append((tuple(cfg), p.numbers_until_semicolon()))
                else:
                    inner = p.word()
                    if inner == "table":
                        entries.append(("table", p.numbers_until_semicolon()))
                    elif inner == "property":
                        p.skip_property()
                    else:
                        p.fail(f"unsupported entry {inner!r} in probability block")
            p.expect("}")
            prob_blocks.append((child, parents, entries, where))
        else:
            p.fail(f"unexpected keyword {kw!r}")

    index = {v: i for i, v in enumerate(names)}
    par: list[tuple[int, ...] | None] = [None] * len(names)
    cpts: list[np.ndarray | None] = [None] * len(names)
    for child, parents, entries, where in prob_blocks:
        for v in [child, *parents]:
            if v not in index:
                raise BifSyntaxError(f"undeclared variable {v!r}", *where)
        ci = index[child]
        if cpts[ci] is not None:
            raise BifSyntaxError(f"duplicate probability block for {child!r}", *where)
        pidx = tuple(index[v] for v in parents)
        r = len(states[child])
        pcards = [len(states[names[j]]) for j in pidx]
        q = int(np.prod(pcards, dtype=np.int64))
        table = np.full((q, r), np.nan)
        for key, vals in entries:
            if len(vals) != r:
                raise BifSyntaxError(f"wrong number of probabilities for {child!r}", *where)
            if key == "table":
                if pidx:
                    raise BifSyntaxError(f"conditional 'table' entries unsupported for {child!r}", *where)
                table[0] = vals
                continue
            if len(key) != len(pidx):
                raise BifSyntaxError(f"parent configuration arity mismatch for {child!r}", *where)
            row = 0
            for j, s, card in zip(pidx, key, pcards):
                try:
                    row = row * card + states[names[j]].index(s)
                except ValueError:
                    raise BifSyntaxError(f"unknown state {s!r} of {names[j]!r}", *where) from None
            table[row] = vals
        if np.isnan(table).any():
            raise BifSyntaxError(f"incomplete CPT for {child!r}", *where)
        for k in range(q):
            table[k] = _clean_row(table[k], child)
        par[ci] = pidx
        cpts[ci] = table
    for i, v in enumerate(names):
        if cpts[i] is None:
            raise ValueError(f"no probability block for variable {v!r}")
    return BayesNet(net_name, names, [states[v] for v in names], par, cpts)  # type: ignore[arg-type]


def render_bif(bn: BayesNet) -> str:
    """Inverse of :func:`parse_bif` (floats written with ``repr``)."""
    out = [f"network {bn.name} {{", "}"]
    for v, st in zip(bn.names, bn.states):
        out += [f"variable {v} {{", f"  type discrete [ {len(st)} ] {{ {', '.join(st)} }};", "}"]
    for i, v in enumerate(bn.names):
        ps = bn.parents[i]
        head = f"probability ( {v} | {', '.join(bn.names[j] for j in ps)} ) {{" if ps else f"probability ( {v} ) {{"
        out.append(head)
        cpt = bn.cpts[i]
        if not ps:
            out.append("  table " + ", ".join(repr(float(x)) for x in cpt[0]) + ";")
        else:
            cards = [len(bn.states[j]) for j in ps]
            for row, cfg in enumerate(np.ndindex(*cards)):
                labels = ", ".join(bn.states[j][s] for j, s in zip(ps, cfg))
                out.append(f"  ({labels}) " + ", ".join(repr(float(x)) for x in cpt[row]) + ";")
        out.append("}")
    return "\n".join(out) + "\n"


def load_network(name: str) -> BayesNet:
    """Load one of the bundled repository networks (asia, child, insurance)."""
    if name not in BUNDLED_NETWORKS:
        raise KeyError(f"unknown network {name!r}; bundled: {BUNDLED_NETWORKS}")
    text = resources.files(__package__).joinpath(f"data/networks/{name}.bif").read_text()
    bn = parse_bif(text)
    bn.name = name
    return bn


def read_bif(path: str | Path) -> BayesNet:
    return parse_bif(Path(path).read_text())


# --- sampling --------------------------------------------------------------

def forward_sample(bn: BayesNet, n: int, seed: int) -> DiscreteDataset:
    """Draw ``n`` i.i.d. joint samples ancestrally."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    cards = bn.cardinalities
    values = np.zeros((n, bn.d), dtype=np.int64)
    for v in bn.graph.topological_order():
        cfg = np.zeros(n, dtype=np.int64)
        for p in bn.parents[v]:
            cfg = cfg * cards[p] + values[:, p]
        cum = np.cumsum(bn.cpts[v], axis=1)
        u = rng.random(n)
        draw = (cum[cfg] <= u[:, None]).sum(axis=1)
        values[:, v] = np.minimum(draw, cards[v] - 1)
    return DiscreteDataset(values, cards, tuple(bn.names))


def write_dataset_csv(data: DiscreteDataset, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(data.names)
        w.writerows(data.values.tolist())


def read_dataset_csv(path: str | Path, cardinalities: Sequence[int]) -> DiscreteDataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = tuple(rows[0])
    values = np.array(rows[1:], dtype=np.int64).reshape(-1, len(names))
    return DiscreteDataset(values, np.asarray(cardinalities), names)


# --- metadata --------------------------------------------------------------

def load_metadata(text: str) -> list[VariableMeta]:
    """Parse ``Domain description:`` header plus ``id,name,metadata`` rows.

    Ids are 1-based in the file and converted to 0-based indices.
    """
    domain = ""
    body = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        low = line.lower()
        if low.startswith("domain description:"):
            domain = line.split(":", 1)[1].strip()
        elif low.startswith("variable id"):
            continue
        else:
            body.append(line)
    metas: dict[int, VariableMeta] = {}
    for row in csv.reader(io.StringIO("\n".join(body)), skipinitialspace=True):
        if len(row) < 3:
            raise MetadataError(f"malformed metadata row {row!r}")
        try:
            idx = int(row[0]) - 1
        except ValueError:
            raise MetadataError(f"non-integer id in {row!r}") from None
        if idx in metas:
            raise MetadataError(f"duplicate id {idx + 1}")
        desc = ",".join(row[2:]).strip()
        if not desc:
            raise MetadataError(f"empty description for id {idx + 1}")
        metas[idx] = VariableMeta(idx, row[1].strip(), desc, domain)
    if sorted(metas) != list(range(len(metas))):
        raise MetadataError("metadata ids must be exactly 1..d")
    return [metas[i] for i in range(len(metas))]


def load_bundled_metadata(name: str) -> list[VariableMeta]:
    text = resources.files(__package__).joinpath(f"data/metadata/{name}.csv").read_text(encoding="utf-8")
    return load_metadata(text)


def align_metadata(bn: BayesNet, metas: list[VariableMeta]) -> list[VariableMeta]:
    """Return metadata re-indexed to ``bn``'s variable order.

    Rows are matched by variable name; when no name matches, by id order.
    """
    if len(metas) != bn.d:
        raise MetadataError(f"metadata has {len(metas)} entries, network has {bn.d} variables")
    by_name = {m.name: m for m in metas}
    if set(by_name) == set(bn.names):
        return [
            VariableMeta(i, v, by_name[v].description, by_name[v].domain) for i, v in enumerate(bn.names)
        ]
    if set(by_name) & set(bn.names):
        missing = sorted(set(bn.names) - set(by_name))
        raise MetadataError(f"metadata missing variables {missing}")
    return [VariableMeta(i, bn.names[i], m.description, m.domain) for i, m in enumerate(metas)]
