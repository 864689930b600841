from .cduct import (
    BUDGET_GRID,
    TAU_GRID,
    CdUctSearch,
    RolloutSampler,
    SearchConfig,
    SearchResult,
    SearchState,
    cduct_search,
    simulation_policy_sample,
    softmax_probabilities,
)
from .greedy import greedy_top_m
from .io import dumps_edges, load_graph, loads_edges, save_graph
from .state import BitsetDag

__all__ = [
    "BUDGET_GRID",
    "TAU_GRID",
    "BitsetDag",
    "CdUctSearch",
    "RolloutSampler",
    "SearchConfig",
    "SearchResult",
    "SearchState",
    "cduct_search",
    "dumps_edges",
    "greedy_top_m",
    "load_graph",
    "loads_edges",
    "save_graph",
    "simulation_policy_sample",
    "softmax_probabilities",
]
