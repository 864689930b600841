"""Append-only JSON-lines cache of expert queries keyed by (model, prompt)."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from ..priors import QueryResponse

log = logging.getLogger(__name__)


def cache_key(model_id: str, prompt: str) -> str:
    return hashlib.sha256(json.dumps([model_id, prompt]).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class QueryRecord:
    prompt_text: str
    raw_token_probs: dict[str, float]
    response: QueryResponse
    model_id: str
    verb: str
    pair: tuple[int, int]
    timestamp: float

    def to_json(self) -> str:
        r = self.response
        return json.dumps(
            {
                "key": cache_key(self.model_id, self.prompt_text),
                "model_id": self.model_id,
                "verb": self.verb,
                "pair": list(self.pair),
                "timestamp": self.timestamp,
                "prompt_text": self.prompt_text,
                "raw_token_probs": self.raw_token_probs,
                "response": [r.i, r.j, r.verb, r.p_a, r.p_b, r.p_c],
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "QueryRecord":
        obj = json.loads(line)
        i, j, verb, a, b, c = obj["response"]
        return cls(
            obj["prompt_text"],
            {k: float(v) for k, v in obj["raw_token_probs"].items()},
            QueryResponse(i, j, verb, a, b, c),
            obj["model_id"],
            obj["verb"],
            tuple(obj["pair"]),
            obj["timestamp"],
        )


class QueryCache:
    """Thread-safe; each record is appended with a single ``write`` call."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[str, QueryRecord] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    if not line.endswith("\n"):
                        log.warning("ignoring incomplete trailing record in %s", self.path)
                        break
                    rec = QueryRecord.from_json(line)
                    self._records[cache_key(rec.model_id, rec.prompt_text)] = rec

    def __len__(self) -> int:
        return len(self._records)

    def get(self, model_id: str, prompt: str) -> QueryRecord | None:
        return self._records.get(cache_key(model_id, prompt))

    def put(self, record: QueryRecord) -> None:
        key = cache_key(record.model_id, record.prompt_text)
        data = (record.to_json() + "\n").encode("utf-8")
        with self._lock:
            if key in self._records:
                return
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd = os.open(self.path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
            try:
                os.write(fd, data)
            finally:
                os.close(fd)
            self._records[key] = record
