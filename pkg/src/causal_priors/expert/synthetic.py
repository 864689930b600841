"""Offline noisy-oracle expert and a mock completions transport around it.

The synthetic expert knows a hidden truth graph.  For a true edge it believes
the correct orientation with probability ``p_correct`` (drawn once per verb and
unordered pair) and puts ``edge_confidence`` on the believed direction; for a
non-edge it puts ``no_edge_mass`` on option (C).  Dirichlet noise with
concentration ``concentration`` perturbs each answer.  A coherent expert uses
one draw per unordered pair so both query orientations agree exactly.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Sequence

import httpx
import numpy as np

from ..bayesnet import VariableMeta
from ..graph import Dag
from ..priors import QueryResponse
from .prompts import PromptSpec, THREE_WAY, TWO_WAY, VERBS


@dataclass(frozen=True)
class SyntheticExpert:
    truth: Dag
    p_correct: float = 0.9
    edge_confidence: float = 0.7
    no_edge_mass: float = 0.6
    concentration: float = 50.0
    coherent: bool = True
    seed: int = 0

    def _rng(self, verb: str, *key: int) -> np.random.Generator:
        vi = VERBS.index(verb) if verb in VERBS else len(VERBS) + sum(map(ord, verb))
        return np.random.default_rng(np.random.SeedSequence([self.seed, vi, *key]))

    def _pair_belief(self, u: int, v: int, verb: str) -> np.ndarray:
        """(P(u->v), P(v->u), P(none)) before noise, for u < v."""
        rng = self._rng(verb, u, v, 0)
        flip = rng.random() >= self.p_correct
        if (u, v) in self.truth.edges or (v, u) in self.truth.edges:
            forward = ((u, v) in self.truth.edges) != flip
            hi = self.edge_confidence
            lo = (1.0 - hi) / 2.0
            return np.array([hi, lo, lo]) if forward else np.array([lo, hi, lo])
        side = (1.0 - self.no_edge_mass) / 2.0
        return np.array([side, side, self.no_edge_mass])

    def _noisy(self, base: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if not math.isfinite(self.concentration):
            return base
        return rng.dirichlet(np.maximum(base, 1e-3) * self.concentration)

    def answer(self, i: int, j: int, verb: str, arity: str = THREE_WAY) -> tuple[float, float, float]:
        """Outcome probabilities (a, b, c) for query (i, j)."""
        u, v = min(i, j), max(i, j)
        base = self._pair_belief(u, v, verb)
        if self.coherent:
            trip = self._noisy(base, self._rng(verb, u, v, 1))
        else:
            trip = self._noisy(base, self._rng(verb, i, j, 2))
        fwd, back, none = (trip[0], trip[1], trip[2]) if i == u else (trip[1], trip[0], trip[2])
        if arity == TWO_WAY:
            s = fwd + back
            return fwd / s, back / s, 0.0
        return float(fwd), float(back), float(none)

    def responses(self, verb: str, arity: str = THREE_WAY) -> list[QueryResponse]:
        d = self.truth.d
        out = []
        for i in range(d):
            for j in range(d):
                if i != j:
                    a, b, c = self.answer(i, j, verb, arity)
                    out.append(QueryResponse(i, j, verb, a, b, max(c, 0.0)))
        return out


class SyntheticExpertTransport(httpx.BaseTransport):
    """httpx transport that answers ``/completions`` requests from a synthetic expert.

    The queried pair and verb are recovered from the prompt's final ``(A)`` line.
    ``requests`` counts served calls.
    """

    JUNK_MASS = 1e-3

    def __init__(self, expert: SyntheticExpert, meta: Sequence[VariableMeta]):
        self.expert = expert
        self.requests = 0
        self._lines: dict[str, tuple[int, int, str]] = {}
        for i, mi in enumerate(meta):
            for j, mj in enumerate(meta):
                if i != j:
                    for verb in VERBS:
                        self._lines[f"(A) {mi.description} {verb} {mj.description}"] = (i, j, verb)

    def _decode(self, prompt: str) -> tuple[int, int, str, str]:
        lines = prompt.split("\n")
        a_lines = [ln for ln in lines if ln.startswith("(A) ")]
        if not a_lines or a_lines[-1] not in self._lines:
            raise KeyError("prompt does not match any variable pair")
        i, j, verb = self._lines[a_lines[-1]]
        arity = THREE_WAY if any(ln.startswith("(C) ") for ln in lines[-4:]) else TWO_WAY
        return i, j, verb, arity

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        if not request.url.path.endswith("/completions"):
            return httpx.Response(404, json={"error": "not found"})
        body = json.loads(request.content)
        try:
            i, j, verb, arity = self._decode(body["prompt"])
        except KeyError as exc:
            return httpx.Response(400, json={"error": str(exc)})
        self.requests += 1
        a, b, c = self.expert.answer(i, j, verb, arity)
        scale = 1.0 - self.JUNK_MASS
        top = {" (A": a * scale, " (B": b * scale, " The": self.JUNK_MASS / 2, "\n": self.JUNK_MASS / 2}
        if arity == THREE_WAY:
            top[" (C"] = c * scale
        logprobs = {tok: (math.log(p) if p > 0 else -1e4) for tok, p in top.items()}
        best = max(logprobs, key=logprobs.get)
        return httpx.Response(
            200,
            json={
                "object": "text_completion",
                "model": body.get("model"),
                "choices": [
                    {
                        "text": best,
                        "index": 0,
                        "logprobs": {
                            "tokens": [best],
                            "token_logprobs": [logprobs[best]],
                            "top_logprobs": [logprobs],
                        },
                        "finish_reason": "length",
                    }
                ],
            },
        )
