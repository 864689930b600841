"""Edge-list text format (``i -> j`` per line) with a JSON sidecar."""
from __future__ import annotations

import json
import re
from pathlib import Path

from ..graph import Dag

_LINE = re.compile(r"^\s*(\d+)\s*->\s*(\d+)\s*$")


def dumps_edges(g: Dag) -> str:
    return "".join(f"{i} -> {j}\n" for i, j in sorted(g.edges))


def loads_edges(text: str, d: int) -> Dag:
    edges = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {lineno}: expected 'i -> j', got {line!r}")
        edges.add((int(m.group(1)), int(m.group(2))))
    return Dag(d, frozenset(edges))


def save_graph(g: Dag, path: str | Path, *, score: float, shd: int | None, config: dict) -> None:
    """Write ``path`` as an edge list and ``path.json`` with {score, shd, config}."""
    path = Path(path)
    path.write_text(dumps_edges(g))
    sidecar = {"score": score, "shd": shd, "config": config}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, sort_keys=True, indent=2) + "\n")


def load_graph(path: str | Path, d: int) -> tuple[Dag, dict]:
    path = Path(path)
    side = Path(str(path) + ".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    return loads_edges(path.read_text(), d), meta
