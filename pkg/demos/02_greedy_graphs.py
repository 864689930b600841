"""Turning a prior straight into a graph: keep the top-m edges that stay acyclic.

No data is scored here. The number of true edges m is given, and the question
is how far each prior's ranking lands from the truth.
"""
import numpy as np

from causal_priors.bayesnet import forward_sample, load_network
from causal_priors.discovery import greedy_top_m
from causal_priors.expert import SyntheticExpert
from causal_priors.graph import shd
from causal_priors.priors import aggregate_llm_prior, combine_hadamard, mi_prior, random_uniform_prior

SEEDS = 50

for name in ("asia", "child"):
    bn = load_network(name)
    truth = bn.graph
    data = forward_sample(bn, 1000, seed=0)
    mi = mi_prior(data)
    llm = aggregate_llm_prior(SyntheticExpert(truth, p_correct=0.9).responses("causes"), truth.d)
    both = combine_hadamard(mi, llm)
    rows = {"random": [], "MI": [], "expert": [], "MI x expert": []}
    for seed in range(SEEDS):
        rng = np.random.default_rng(seed)
        rows["random"].append(shd(greedy_top_m(random_uniform_prior(truth.d, rng), truth.m, rng), truth))
        rows["MI"].append(shd(greedy_top_m(mi, truth.m, rng), truth))
        rows["expert"].append(shd(greedy_top_m(llm, truth.m, rng), truth))
        rows["MI x expert"].append(shd(greedy_top_m(both, truth.m, rng), truth))
    print(f"{name} (d={truth.d}, m={truth.m}); mean SHD over {SEEDS} seeds")
    for kind, vals in rows.items():
        print(f"  {kind:12s} {np.mean(vals):6.2f}")
