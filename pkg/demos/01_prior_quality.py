"""How good is a soft edge prior before any search runs?

We build three priors for the Asia network (uniform, mutual information, and
answers from a noisy synthetic expert) and score each against the true graph.
"""
import numpy as np

from causal_priors.bayesnet import forward_sample, load_network
from causal_priors.expert import SyntheticExpert
from causal_priors.metrics import compute_metrics
from causal_priors.priors import aggregate_llm_prior, combine_hadamard, mi_prior, uniform_prior, uniform_responses

bn = load_network("asia")
truth = bn.graph
print(f"{bn.name}: {truth.d} variables, {truth.m} edges")
print("true edges:", ", ".join(f"{bn.names[i]}->{bn.names[j]}" for i, j in sorted(truth.edges)))

data = forward_sample(bn, 1000, seed=0)

# The uniform prior has no opinion, which pins FCO to 1/2 and TERE to m.
flat = compute_metrics(uniform_prior(truth.d), truth, raw=uniform_responses(truth.d))
print(f"\nuniform       FCO={flat.fco:.3f} TERE={flat.tere:.1f} TENE={flat.tene:.3f} LOD={flat.lod}")

# Mutual information knows which pairs are linked but is blind to direction.
mi = compute_metrics(mi_prior(data), truth)
print(f"MI            FCO={mi.fco:.3f} TERE={mi.tere:.1f} TENE={mi.tene:.3f}")

# An expert that gets each pair right 90% of the time, asked with two verbs.
for verb in ("causes", "leads to"):
    expert = SyntheticExpert(truth, p_correct=0.9)
    responses = expert.responses(verb)
    llm = aggregate_llm_prior(responses, truth.d, "synthetic", "3way")
    rep = compute_metrics(llm, truth, raw=responses)
    print(f"expert/{verb:9s} FCO={rep.fco:.3f} TERE={rep.tere:.1f} TENE={rep.tene:.3f} LOD={rep.lod:.3f}")

# The product keeps the expert's direction and MI's sense of which pairs matter.
combined = combine_hadamard(mi_prior(data), llm)
rep = compute_metrics(combined, truth)
print(f"MI x expert   FCO={rep.fco:.3f} TERE={rep.tere:.1f} TENE={rep.tene:.3f}")

# A careless expert answers each orientation of a pair independently.
sloppy = SyntheticExpert(truth, p_correct=0.9, coherent=False).responses("causes")
rep = compute_metrics(aggregate_llm_prior(sloppy, truth.d), truth, raw=sloppy)
print(f"\nincoherent expert LOD={rep.lod:.3f} (a coherent one scores exactly 0)")
np.set_printoptions(precision=2, suppress=True)
print("\nexpert prior matrix (row i, column j holds mass on i->j):")
print(llm.p)
