"""The query pipeline end to end, against an in-process stand-in for a completions server.

Each ordered pair of variables becomes one prompt. The server's top-token
log-probabilities are mapped back onto the answer labels and renormalized, and
every answer is appended to a JSONL cache so a rerun makes no requests.
"""
import tempfile
from pathlib import Path

from causal_priors.bayesnet import align_metadata, load_bundled_metadata, load_network
from causal_priors.expert import (
    ExpertEndpoint,
    PromptSpec,
    QueryCache,
    SyntheticExpert,
    SyntheticExpertTransport,
    build_prompt,
    run_all_queries,
)
from causal_priors.metrics import compute_metrics
from causal_priors.priors import aggregate_llm_prior

bn = load_network("asia")
meta = align_metadata(bn, load_bundled_metadata("asia"))
spec = PromptSpec.from_traits("3way+varlist", "causes")

print("prompt for pair (0, 1):\n")
print(build_prompt(spec, 0, 1, meta))

transport = SyntheticExpertTransport(SyntheticExpert(bn.graph, p_correct=0.9), meta)
endpoint = ExpertEndpoint("http://synthetic.invalid/v1", "synthetic", transport=transport)

with tempfile.TemporaryDirectory() as tmp:
    cache = QueryCache(Path(tmp) / "queries.jsonl")
    responses = run_all_queries(endpoint, spec, meta, cache)
    print(f"\nfirst pass: {transport.requests} requests for {len(responses)} ordered pairs")
    run_all_queries(endpoint, spec, meta, cache)
    print(f"second pass: {transport.requests} requests in total (all served from the cache)")

prior = aggregate_llm_prior(responses, bn.d, "synthetic", spec.traits)
rep = compute_metrics(prior, bn.graph, raw=responses)
print(f"\nprior quality: FCO={rep.fco:.3f} TERE={rep.tere:.1f} TENE={rep.tene:.3f} LOD={rep.lod:.3f}")
