"""Next-token probability queries against an OpenAI-style completions endpoint."""
from __future__ import annotations

import logging
import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import httpx

from ..bayesnet import VariableMeta
from ..priors import QueryResponse
from .cache import QueryCache, QueryRecord
from .prompts import PromptSpec, build_prompt

log = logging.getLogger(__name__)

LABEL_FLOOR = 1e-8


class ExpertError(RuntimeError):
    pass


class ExpertTransportError(ExpertError):
    pass


class UnparseableResponseError(ExpertError):
    def __init__(self, msg: str, pair: tuple[int, int] | None = None):
        super().__init__(msg if pair is None else f"{msg} (pair {pair})")
        self.pair = pair


@dataclass
class ExpertEndpoint:
    base_url: str
    model_id: str
    api_key: str | None = None
    timeout: float = 60.0
    max_retries: int = 3
    backoff: float = 0.5
    top_k: int = 20
    transport: httpx.BaseTransport | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.base_url:
            raise ValueError("base_url must be non-empty")
        if not 0 <= self.max_retries <= 10:
            raise ValueError("max_retries must be in [0, 10]")

    @classmethod
    def from_env(cls, model_id: str, **kwargs) -> "ExpertEndpoint":
        base = os.environ.get("EXPERT_BASE_URL", "")
        if not base:
            raise ExpertError("EXPERT_BASE_URL is not set")
        return cls(base, model_id, api_key=os.environ.get("EXPERT_API_KEY"), **kwargs)

    def client(self) -> httpx.Client:
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        return httpx.Client(
            base_url=self.base_url.rstrip("/"),
            headers=headers,
            timeout=self.timeout,
            transport=self.transport,
        )


def completion_request(endpoint: ExpertEndpoint, prompt: str) -> dict:
    return {
        "model": endpoint.model_id,
        "prompt": prompt,
        "max_tokens": 1,
        "temperature": 0,
        "logprobs": endpoint.top_k,
    }


def top_alternatives(payload: dict) -> dict[str, float]:
    """Map token text -> log-probability for the first generated position.

    Accepts both the legacy ``top_logprobs: [{token: logprob}]`` layout and the
    ``content: [{top_logprobs: [{token, logprob}]}]`` layout.
    """
    try:
        lp = payload["choices"][0]["logprobs"]
    except (KeyError, IndexError, TypeError):
        raise UnparseableResponseError("response carries no logprobs") from None
    if not lp:
        raise UnparseableResponseError("response carries no logprobs")
    if lp.get("top_logprobs"):
        first = lp["top_logprobs"][0]
        return {str(k): float(v) for k, v in first.items()}
    if lp.get("content"):
        alts = lp["content"][0].get("top_logprobs") or []
        return {str(a["token"]): float(a["logprob"]) for a in alts}
    raise UnparseableResponseError("response carries no logprobs")


def _label_pattern(label: str) -> re.Pattern:
    return re.compile(rf"^\(?{re.escape(label)}(?![A-Za-z0-9])")


def label_masses(alternatives: dict[str, float], labels: Sequence[str]) -> dict[str, float]:
    """Sum token probabilities per answer label.

    A token counts toward X when, after stripping leading whitespace, it reads
    ``X`` or ``(X`` and is not the start of a longer word.
    """
    pats = {lab: _label_pattern(lab) for lab in labels}
    out = {lab: 0.0 for lab in labels}
    for tok, logprob in alternatives.items():
        text = tok.lstrip()
        for lab, pat in pats.items():
            if pat.match(text):
                out[lab] += math.exp(logprob)
                break
    return out


def renormalize(masses: dict[str, float], labels: Sequence[str], pair=None) -> tuple[float, float, float]:
    vals = [masses.get(lab, 0.0) for lab in labels]
    if max(vals) < LABEL_FLOOR:
        raise UnparseableResponseError("no answer label above probability floor", pair)
    total = math.fsum(vals)
    probs = [v / total for v in vals]
    if len(probs) == 2:
        return probs[0], probs[1], 0.0
    return probs[0], probs[1], probs[2]


def _post_with_retries(endpoint: ExpertEndpoint, client: httpx.Client, body: dict) -> dict:
    last: Exception | None = None
    for attempt in range(endpoint.max_retries + 1):
        try:
            resp = client.post("/completions", json=body)
            if resp.status_code == 429 or resp.status_code >= 500:
                last = ExpertTransportError(f"HTTP {resp.status_code}")
            elif resp.status_code >= 400:
                raise ExpertTransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            else:
                return resp.json()
        except httpx.TransportError as exc:
            last = exc
        if attempt < endpoint.max_retries:
            time.sleep(endpoint.backoff * 2**attempt)
    raise ExpertTransportError(f"request failed after {endpoint.max_retries + 1} attempts: {last}")


def query_expert(
    endpoint: ExpertEndpoint,
    prompt: str,
    labels: Sequence[str] = ("A", "B", "C"),
    *,
    pair: tuple[int, int] = (0, 1),
    verb: str = "",
    client: httpx.Client | None = None,
) -> QueryRecord:
    """One-token, temperature-0 completion; answer-label masses renormalised.

    ``pair`` and ``verb`` only label the record; they do not affect the request.
    """
    own = client is None
    client = client or endpoint.client()
    try:
        payload = _post_with_retries(endpoint, client, completion_request(endpoint, prompt))
    finally:
        if own:
            client.close()
    masses = label_masses(top_alternatives(payload), labels)
    p_a, p_b, p_c = renormalize(masses, labels, pair)
    response = QueryResponse(pair[0], pair[1], verb, p_a, p_b, p_c)
    return QueryRecord(prompt, masses, response, endpoint.model_id, verb, pair, time.time())


def run_all_queries(
    endpoint: ExpertEndpoint,
    spec: PromptSpec,
    meta: Sequence[VariableMeta],
    cache: QueryCache | None = None,
    max_in_flight: int = 4,
) -> list[QueryResponse]:
    """Query every ordered pair, serving repeated prompts from ``cache``."""
    d = len(meta)
    if d < 2:
        raise ValueError("need at least two variables")
    pairs = [(i, j) for i in range(d) for j in range(d) if i != j]
    prompts = {pair: build_prompt(spec, pair[0], pair[1], meta) for pair in pairs}
    results: dict[tuple[int, int], QueryResponse] = {}
    todo = []
    for pair in pairs:
        rec = cache.get(endpoint.model_id, prompts[pair]) if cache else None
        if rec is not None:
            r = rec.response
            results[pair] = QueryResponse(pair[0], pair[1], spec.verb, r.p_a, r.p_b, r.p_c)
        else:
            todo.append(pair)
    if todo:
        log.info("querying %d/%d pairs (verb=%r, traits=%s)", len(todo), len(pairs), spec.verb, spec.traits)
        with endpoint.client() as client:

            def one(pair):
                return query_expert(
                    endpoint, prompts[pair], spec.labels, pair=pair, verb=spec.verb, client=client
                )

            with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
                futures = {pair: pool.submit(one, pair) for pair in todo}
                for pair, fut in futures.items():
                    try:
                        rec = fut.result()
                    except ExpertError as exc:
                        raise type(exc)(f"query for pair {pair} failed: {exc}") from exc
                    if cache is not None:
                        cache.put(rec)
                    results[pair] = rec.response
    return [results[pair] for pair in pairs]
