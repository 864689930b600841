"""Prompt construction from the fixed template blocks and trait flags."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from string import Template
from typing import Sequence

from ..bayesnet import VariableMeta

VERBS = (
    "causes",
    "provokes",
    "triggers",
    "leads to",
    "induces",
    "results in",
    "brings about",
    "yields",
    "generates",
    "initiates",
    "produces",
    "stimulates",
    "instigates",
    "fosters",
    "engenders",
    "promotes",
    "catalyzes",
    "gives rise to",
    "spurs",
    "sparks",
)

THREE_WAY = "three_way"
TWO_WAY = "two_way"
ARITIES = (THREE_WAY, TWO_WAY)


class PromptError(ValueError):
    pass


@lru_cache(maxsize=None)
def template(name: str) -> Template:
    text = resources.files(__package__).joinpath(f"templates/{name}.txt").read_text(encoding="utf-8")
    return Template(text.rstrip("\n"))


@dataclass(frozen=True)
class PromptSpec:
    arity: str = THREE_WAY
    variable_list: bool = False
    example: bool = False
    priming: bool = False
    verb: str = "causes"

    def __post_init__(self):
        if self.arity not in ARITIES:
            raise PromptError(f"unknown arity {self.arity!r}")
        if self.verb not in VERBS:
            raise PromptError(f"unknown verb {self.verb!r}")

    @property
    def labels(self) -> tuple[str, ...]:
        return ("A", "B", "C") if self.arity == THREE_WAY else ("A", "B")

    @property
    def traits(self) -> str:
        """Short stable label such as ``3way+varlist+priming`` or ``2way``."""
        parts = ["3way" if self.arity == THREE_WAY else "2way"]
        parts += [name for name, on in (("varlist", self.variable_list), ("example", self.example), ("priming", self.priming)) if on]
        return "+".join(parts)

    @classmethod
    def from_traits(cls, traits: str, verb: str = "causes") -> "PromptSpec":
        parts = traits.split("+")
        if parts[0] not in ("3way", "2way"):
            raise PromptError(f"bad trait label {traits!r}")
        flags = set(parts[1:])
        unknown = flags - {"varlist", "example", "priming"}
        if unknown:
            raise PromptError(f"unknown traits {sorted(unknown)}")
        return cls(
            THREE_WAY if parts[0] == "3way" else TWO_WAY,
            "varlist" in flags,
            "example" in flags,
            "priming" in flags,
            verb,
        )


def trait_grid() -> list[str]:
    """All 2 x 2^3 arity/trait combinations."""
    out = []
    for arity in ("3way", "2way"):
        for mask in range(8):
            flags = [n for k, n in enumerate(("varlist", "example", "priming")) if mask >> k & 1]
            out.append("+".join([arity, *flags]))
    return out


def build_prompt(spec: PromptSpec, i: int, j: int, meta: Sequence[VariableMeta]) -> str:
    """Compose the prompt for query (i, j): priming, variable list, example, query."""
    if i == j:
        raise PromptError("query pair must be two distinct variables")
    if not (0 <= i < len(meta) and 0 <= j < len(meta)):
        raise PromptError(f"no metadata for pair ({i}, {j})")
    prefix = "three_way" if spec.arity == THREE_WAY else "two_way"
    blocks = []
    if spec.priming:
        blocks.append(template(f"{prefix}_priming").substitute(domain=meta[i].domain))
    if spec.variable_list:
        blocks.append(template("variable_list").substitute(varlist="\n".join(m.description for m in meta)))
    if spec.example:
        blocks.append(template(f"{prefix}_example").substitute(verb=spec.verb))
    blocks.append(
        template(f"{prefix}_query").substitute(
            xvar=meta[i].description, yvar=meta[j].description, verb=spec.verb
        )
    )
    return "\n".join(blocks)
