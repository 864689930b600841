from .cache import QueryCache, QueryRecord, cache_key
from .client import (
    ExpertEndpoint,
    ExpertError,
    ExpertTransportError,
    UnparseableResponseError,
    label_masses,
    query_expert,
    renormalize,
    run_all_queries,
    top_alternatives,
)
from .prompts import ARITIES, THREE_WAY, TWO_WAY, VERBS, PromptError, PromptSpec, build_prompt, trait_grid
from .synthetic import SyntheticExpert, SyntheticExpertTransport

__all__ = [
    "ARITIES",
    "THREE_WAY",
    "TWO_WAY",
    "VERBS",
    "ExpertEndpoint",
    "ExpertError",
    "ExpertTransportError",
    "PromptError",
    "PromptSpec",
    "QueryCache",
    "QueryRecord",
    "SyntheticExpert",
    "SyntheticExpertTransport",
    "UnparseableResponseError",
    "build_prompt",
    "cache_key",
    "label_masses",
    "query_expert",
    "renormalize",
    "run_all_queries",
    "top_alternatives",
    "trait_grid",
]
