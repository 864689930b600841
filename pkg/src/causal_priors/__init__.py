"""Soft pairwise edge priors for score-based causal discovery on discrete Bayesian networks."""
from .bayesnet import (
    BayesNet,
    DiscreteDataset,
    VariableMeta,
    align_metadata,
    forward_sample,
    load_bundled_metadata,
    load_network,
    parse_bif,
    render_bif,
)
from .graph import CycleError, Dag, InvalidEdgeError, shd, would_create_cycle
from .metrics import MetricsReport, compute_metrics
from .priors import (
    PriorMatrix,
    QueryResponse,
    aggregate_llm_prior,
    combine_hadamard,
    mi_prior,
    random_uniform_prior,
    uniform_prior,
)
from .scoring import BicScorer, bic_score, score_delta

__version__ = "0.1.0"

__all__ = [
    "BayesNet",
    "BicScorer",
    "CycleError",
    "Dag",
    "DiscreteDataset",
    "InvalidEdgeError",
    "MetricsReport",
    "PriorMatrix",
    "QueryResponse",
    "VariableMeta",
    "aggregate_llm_prior",
    "align_metadata",
    "bic_score",
    "combine_hadamard",
    "compute_metrics",
    "forward_sample",
    "load_bundled_metadata",
    "load_network",
    "mi_prior",
    "parse_bif",
    "random_uniform_prior",
    "render_bif",
    "score_delta",
    "shd",
    "uniform_prior",
    "would_create_cycle",
]
