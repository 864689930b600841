"""Experiment orchestration: prior construction, run scheduling and suites.

Every run is described by a :class:`RunSpec`; its fingerprint hashes the spec
together with the experiment context, and its seed is derived from
``(master seed, verb index, replicate)``. Runs are independent, so a worker
pool may execute them in any order; results are always returned sorted by
fingerprint.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import httpx
import numpy as np

from ..bayesnet import BayesNet, DiscreteDataset, align_metadata, forward_sample, load_bundled_metadata, load_network
from ..discovery.cduct import SearchConfig, cduct_search
from ..discovery.greedy import greedy_top_m
from ..expert.cache import QueryCache
from ..expert.client import ExpertEndpoint, ExpertError, run_all_queries
from ..expert.prompts import PromptSpec
from ..expert.synthetic import SyntheticExpert, SyntheticExpertTransport
from ..graph import Dag, shd
from ..metrics import compute_metrics
from ..priors import (
    PriorMatrix,
    QueryResponse,
    aggregate_llm_prior,
    combine_hadamard,
    mi_prior,
    random_uniform_prior,
    uniform_prior,
    uniform_responses,
)
from ..scoring import BicScorer
from .config import ExperimentConfig
from .stats import TTestResult, paired_t_test, t_interval

log = logging.getLogger(__name__)

METRIC_NAMES = ("fco", "tere", "tene", "lod")
TRAITS = ("varlist", "example", "priming")
# prior kinds ordered as table columns
TABLE_KINDS = ("MI", "LLM", "combined", "UR")


class MissingQueryCacheError(ExpertError):
    pass


def derive_seed(master: int, verb_index: int, replicate: int) -> int:
    """Stable 63-bit run seed from the three coordinates."""
    state = np.random.SeedSequence([master, verb_index, replicate]).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


# --- expert sources --------------------------------------------------------

class _CacheOnlyTransport(httpx.BaseTransport):
    """Stand-in transport that fails every request: nothing may leave the cache."""

    def handle_request(self, request):
        raise MissingQueryCacheError("query not in cache and the endpoint is disabled")


class ExpertSource:
    """Produces per-pair query responses for one dataset and prompt."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        ex = config.expert
        self.cache = QueryCache(ex.cache) if ex.cache else None
        self._endpoints: dict[str, ExpertEndpoint] = {}

    def _expert(self, truth: Dag) -> SyntheticExpert:
        s = self.config.expert.synthetic
        return SyntheticExpert(
            truth, s.p_correct, s.edge_confidence, s.no_edge_mass, s.concentration, s.coherent, s.seed
        )

    def _endpoint(self, dataset: str, truth: Dag, meta) -> ExpertEndpoint:
        ex = self.config.expert
        key = dataset if ex.mode == "mock" else ""
        if key not in self._endpoints:
            common = dict(timeout=ex.timeout, max_retries=ex.max_retries)
            if ex.mode == "mock":
                transport = SyntheticExpertTransport(self._expert(truth), meta)
                ep = ExpertEndpoint("http://synthetic.invalid/v1", ex.model_id, transport=transport, **common)
            elif ex.mode == "endpoint":
                ep = ExpertEndpoint.from_env(ex.model_id, **common)
            else:
                ep = ExpertEndpoint("http://cache-only.invalid/v1", ex.model_id, transport=_CacheOnlyTransport(), max_retries=0)
            self._endpoints[key] = ep
        return self._endpoints[key]

    def responses(self, dataset: str, bn: BayesNet, spec: PromptSpec) -> list[QueryResponse]:
        ex = self.config.expert
        if ex.mode == "synthetic":
            return self._expert(bn.graph).responses(spec.verb, spec.arity)
        meta = align_metadata(bn, load_bundled_metadata(dataset))
        ep = self._endpoint(dataset, bn.graph, meta)
        return run_all_queries(ep, spec, meta, self.cache, ex.max_in_flight)


# --- runs ------------------------------------------------------------------

@dataclass(frozen=True)
class RunSpec:
    method: str  # "greedy" or "cduct"
    dataset: str
    prior: str
    verb: str
    replicate: int
    traits: str | None = None
    tau: float | None = None
    budget: int | None = None


@dataclass
class RunResult:
    spec: RunSpec
    fingerprint: str
    seed: int
    shd: int
    score: float
    n_edges: int
    edges: list[tuple[int, int]] = field(default_factory=list)
    wall_time: float = 0.0

    def record(self) -> dict:
        """JSON-ready fields; wall time is left out so records are reproducible."""
        out = {"fingerprint": self.fingerprint, **asdict(self.spec), "seed": self.seed}
        out.update(shd=self.shd, score=self.score, n_edges=self.n_edges, edges=[list(e) for e in self.edges])
        return out

    @classmethod
    def from_record(cls, rec: dict) -> "RunResult":
        spec = RunSpec(**{k: rec[k] for k in RunSpec.__dataclass_fields__})
        return cls(spec, rec["fingerprint"], rec["seed"], rec["shd"], rec["score"], rec["n_edges"],
                   [tuple(e) for e in rec.get("edges", [])], rec.get("wall_time", 0.0))


def context_of(config: ExperimentConfig) -> dict:
    """Config fields that influence a run's outcome besides its own spec."""
    s = config.search
    ctx = {
        "n": config.n,
        "dataset_seed": config.dataset_seed,
        "resample_per_seed": config.resample_per_seed,
        "master_seed": config.master_seed,
        "c_p": s.c_p,
        "horizon": s.horizon,
        "fixed_simulations": s.fixed_simulations,
        "expert_mode": config.expert.mode,
        "model_id": config.expert.model_id,
    }
    if config.expert.mode in ("synthetic", "mock"):
        ctx["synthetic"] = asdict(config.expert.synthetic)
    return ctx


def fingerprint(spec: RunSpec, context: dict) -> str:
    blob = json.dumps({"spec": asdict(spec), "context": context}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class _Task:
    spec: RunSpec
    seed: int
    fingerprint: str


class _Context:
    """Per-process state: networks, LLM priors, and lazily built datasets and scorers."""

    def __init__(self, config: ExperimentConfig, llm_priors: dict):
        self.config = config
        self.llm = llm_priors
        self.networks: dict[str, BayesNet] = {}
        self.datasets: dict[tuple, DiscreteDataset] = {}
        self.scorers: dict[tuple, BicScorer] = {}
        self.mi: dict[tuple, PriorMatrix] = {}

    def network(self, name: str) -> BayesNet:
        if name not in self.networks:
            self.networks[name] = load_network(name)
        return self.networks[name]

    def data_key(self, dataset: str, seed: int) -> tuple:
        if self.config.resample_per_seed:
            ds_seed = int(np.random.SeedSequence([seed, 1]).generate_state(1)[0])
        else:
            ds_seed = self.config.dataset_seed
        return dataset, self.config.n, ds_seed

    def dataset(self, key: tuple) -> DiscreteDataset:
        if key not in self.datasets:
            name, n, ds_seed = key
            self.datasets[key] = forward_sample(self.network(name), n, ds_seed)
            if self.config.resample_per_seed and len(self.datasets) > 64:
                # resampled datasets are used once; keep memory bounded
                oldest = next(iter(self.datasets))
                self.datasets.pop(oldest)
                self.scorers.pop(oldest, None)
                self.mi.pop(oldest, None)
        return self.datasets[key]

    def scorer(self, key: tuple) -> BicScorer:
        if key not in self.scorers:
            self.scorers[key] = BicScorer(self.dataset(key))
        return self.scorers[key]

    def mi_prior(self, key: tuple) -> PriorMatrix:
        if key not in self.mi:
            self.mi[key] = mi_prior(self.dataset(key))
        return self.mi[key]

    def prior(self, spec: RunSpec, key: tuple, rng: np.random.Generator) -> PriorMatrix:
        d = self.network(spec.dataset).d
        if spec.prior == "UR":
            # greedy draws an i.i.d. uniform prior per run; search uses the constant prior
            return random_uniform_prior(d, rng) if spec.method == "greedy" else uniform_prior(d)
        if spec.prior == "MI":
            return self.mi_prior(key)
        llm = self.llm[(spec.dataset, spec.traits, spec.verb)]
        if spec.prior == "LLM":
            return llm
        return combine_hadamard(self.mi_prior(key), llm)

    def execute(self, task: _Task) -> RunResult:
        spec = task.spec
        start = time.perf_counter()
        key = self.data_key(spec.dataset, task.seed)
        truth = self.network(spec.dataset).graph
        rng = np.random.default_rng(task.seed)
        prior = self.prior(spec, key, rng)
        scorer = self.scorer(key)
        if spec.method == "greedy":
            g = greedy_top_m(prior, truth.m, rng)
            score = scorer.score(g)
        else:
            s = self.config.search
            cfg = SearchConfig(
                c_p=s.c_p,
                horizon=s.horizon,
                budget_multiplier=spec.budget,
                tau=spec.tau if spec.tau is not None else 1.0,
                seed=task.seed,
                fixed_simulations=s.fixed_simulations,
            )
            g, score = cduct_search(self.dataset(key), prior, cfg, scorer)
        return RunResult(
            spec, task.fingerprint, task.seed, shd(g, truth), float(score), g.m, sorted(g.edges),
            time.perf_counter() - start,
        )


_WORKER: _Context | None = None


def _init_worker(config: ExperimentConfig, llm_priors: dict) -> None:
    global _WORKER
    _WORKER = _Context(config, llm_priors)


def _run_task(task: _Task) -> RunResult:
    return _WORKER.execute(task)


def llm_priors_for(config: ExperimentConfig, specs: Iterable[RunSpec], source: ExpertSource | None = None) -> dict:
    """Aggregate LLM priors for every (dataset, traits, verb) the specs need."""
    needed = sorted({(s.dataset, s.traits, s.verb) for s in specs if s.prior in ("LLM", "combined")})
    if not needed:
        return {}
    source = source or ExpertSource(config)
    out = {}
    for dataset, traits, verb in needed:
        bn = load_network(dataset)
        resp = source.responses(dataset, bn, PromptSpec.from_traits(traits, verb))
        out[(dataset, traits, verb)] = aggregate_llm_prior(resp, bn.d, config.expert.model_id, traits)
    return out


def execute_runs(config: ExperimentConfig, specs: Sequence[RunSpec], source: ExpertSource | None = None) -> list[RunResult]:
    """Run every spec; results sorted by fingerprint whatever the worker count."""
    ctx = context_of(config)
    verb_index = {v: k for k, v in enumerate(config.verbs)}
    tasks = []
    for spec in specs:
        seed = derive_seed(config.master_seed, verb_index[spec.verb], spec.replicate)
        tasks.append(_Task(spec, seed, fingerprint(spec, ctx)))
    llm = llm_priors_for(config, specs, source)
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(config.workers, initializer=_init_worker, initargs=(config, llm)) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
    else:
        local = _Context(config, llm)
        results = [local.execute(t) for t in tasks]
    results.sort(key=lambda r: r.fingerprint)
    return results


def _replicates(config: ExperimentConfig):
    for verb in config.verbs:
        for rep in range(config.seeds_per_verb):
            yield verb, rep


def _traits_for(kind: str, config: ExperimentConfig) -> str | None:
    return config.prompt if kind in ("LLM", "combined") else None


def greedy_specs(config: ExperimentConfig) -> list[RunSpec]:
    return [
        RunSpec("greedy", ds, kind, verb, rep, _traits_for(kind, config))
        for ds in config.datasets
        for kind in config.priors
        for verb, rep in _replicates(config)
    ]


def discovery_specs(config: ExperimentConfig) -> list[RunSpec]:
    out = []
    for ds in config.datasets:
        for budget in config.search.budget_grid:
            for kind in config.priors:
                # the constant prior makes tau irrelevant, so UR runs once per budget
                taus = (None,) if kind == "UR" else config.search.tau_grid
                for tau in taus:
                    for verb, rep in _replicates(config):
                        out.append(RunSpec("cduct", ds, kind, verb, rep, _traits_for(kind, config), tau, budget))
    return out


def run_greedy_suite(config: ExperimentConfig, source: ExpertSource | None = None) -> list[RunResult]:
    return execute_runs(config, greedy_specs(config), source)


def run_discovery_suite(config: ExperimentConfig, source: ExpertSource | None = None) -> list[RunResult]:
    specs = discovery_specs(config)
    if "UR" not in config.priors:
        # the percentage-decrease table needs the UR reference
        specs += [s for s in discovery_specs(config.replace(priors=("UR",)))]
    return execute_runs(config, specs, source)


# --- summaries -------------------------------------------------------------

def greedy_table(results: Sequence[RunResult]) -> list[dict]:
    """Mean SHD per (dataset, prior kind): rows are datasets, one column per kind."""
    cells: dict[tuple[str, str], list[int]] = {}
    for r in results:
        if r.spec.method == "greedy":
            cells.setdefault((r.spec.dataset, r.spec.prior), []).append(r.shd)
    rows = []
    for ds in sorted({k[0] for k in cells}):
        row = {"dataset": ds}
        for kind in TABLE_KINDS:
            vals = cells.get((ds, kind))
            row[kind] = float(np.mean(vals)) if vals else None
            row[f"{kind}_n"] = len(vals) if vals else 0
        rows.append(row)
    return rows


@dataclass(frozen=True)
class CurvePoint:
    dataset: str
    prior: str
    budget: int
    tau: float | None
    n: int
    score_mean: float
    score_half: float
    shd_mean: float
    shd_half: float


def discovery_curves(results: Sequence[RunResult]) -> list[CurvePoint]:
    """Mean score and SHD with 95% t-intervals for every (dataset, prior, budget, tau)."""
    cells: dict[tuple, list[RunResult]] = {}
    for r in results:
        if r.spec.method == "cduct":
            s = r.spec
            cells.setdefault((s.dataset, s.prior, s.budget, s.tau), []).append(r)
    out = []
    for key in sorted(cells, key=lambda k: (k[0], TABLE_KINDS.index(k[1]) if k[1] in TABLE_KINDS else 99, k[1], k[2], -1 if k[3] is None else k[3])):
        rs = cells[key]
        sc = t_interval([r.score for r in rs])
        sh = t_interval([r.shd for r in rs])
        out.append(CurvePoint(*key, len(rs), sc.mean, sc.half_width, sh.mean, sh.half_width))
    return out


@dataclass(frozen=True)
class DecreaseRow:
    dataset: str
    prior: str
    budget: int
    best_tau: float | None
    score_mean: float
    shd_mean: float
    ur_shd_mean: float
    pct_decrease: float


def best_tau_table(curves: Sequence[CurvePoint]) -> list[DecreaseRow]:
    """Percentage SHD decrease over UR at the tau with the best (lowest) mean score."""
    ur = {(c.dataset, c.budget): c for c in curves if c.prior == "UR"}
    groups: dict[tuple, list[CurvePoint]] = {}
    for c in curves:
        groups.setdefault((c.dataset, c.prior, c.budget), []).append(c)
    rows = []
    for (ds, prior, budget), pts in groups.items():
        best = min(pts, key=lambda c: (c.score_mean, -1 if c.tau is None else c.tau))
        base = ur.get((ds, budget))
        if base is None:
            continue
        if prior == "UR":
            pct = 0.0
        elif base.shd_mean == 0:
            pct = math.nan
        else:
            pct = 100.0 * (base.shd_mean - best.shd_mean) / base.shd_mean
        rows.append(DecreaseRow(ds, prior, budget, best.tau, best.score_mean, best.shd_mean, base.shd_mean, pct))
    return rows


# --- metrics suite ---------------------------------------------------------

@dataclass(frozen=True)
class MetricsRow:
    dataset: str
    model: str
    traits: str
    verb: str
    fco: float
    tere: float
    tene: float
    lod: float


@dataclass(frozen=True)
class MetricsCell:
    dataset: str
    model: str
    traits: str
    n: int
    means: dict
    halves: dict


@dataclass
class MetricsSuiteResult:
    rows: list[MetricsRow]
    cells: list[MetricsCell]


def _metrics_row(dataset, model, traits, verb, prior, truth, responses) -> MetricsRow:
    rep = compute_metrics(prior, truth, raw=responses)
    return MetricsRow(dataset, model, traits, verb, rep.fco, rep.tere, rep.tene, rep.lod)


def summarize_metrics(rows: Sequence[MetricsRow]) -> list[MetricsCell]:
    groups: dict[tuple, list[MetricsRow]] = {}
    for r in rows:
        groups.setdefault((r.dataset, r.model, r.traits), []).append(r)
    cells = []
    for (ds, model, traits), rs in groups.items():
        means, halves = {}, {}
        for name in METRIC_NAMES:
            iv = t_interval([getattr(r, name) for r in rs])
            means[name], halves[name] = iv.mean, iv.half_width
        cells.append(MetricsCell(ds, model, traits, len(rs), means, halves))
    return cells


def run_metrics_suite(config: ExperimentConfig, source: ExpertSource | None = None) -> MetricsSuiteResult:
    """Metrics per (dataset, prompt traits, verb) and their per-cell means over verbs.

    Each dataset also gets a "UR" row computed from uniform responses.
    """
    source = source or ExpertSource(config)
    model = config.expert.model_id
    rows = []
    for ds in config.datasets:
        bn = load_network(ds)
        truth = bn.graph
        rows.append(_metrics_row(ds, "UR", "UR", "", uniform_prior(bn.d), truth, uniform_responses(bn.d)))
        for traits in config.prompt_grid:
            for verb in config.verbs:
                resp = source.responses(ds, bn, PromptSpec.from_traits(traits, verb))
                prior = aggregate_llm_prior(resp, bn.d, model, traits)
                rows.append(_metrics_row(ds, model, traits, verb, prior, truth, resp))
    return MetricsSuiteResult(rows, summarize_metrics(rows))


def paired_trait_test(on: Sequence[float], off: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test of a metric with a trait switched on versus off."""
    return paired_t_test(on, off)


def _toggle(traits: str, trait: str) -> tuple[str, bool]:
    """Counterpart label with ``trait`` flipped, and whether it was on."""
    spec = PromptSpec.from_traits(traits)
    if trait == "3way":
        flipped = PromptSpec("two_way" if spec.arity == "three_way" else "three_way",
                             spec.variable_list, spec.example, spec.priming)
        return flipped.traits, spec.arity == "three_way"
    attr = {"varlist": "variable_list", "example": "example", "priming": "priming"}[trait]
    flags = {"variable_list": spec.variable_list, "example": spec.example, "priming": spec.priming}
    on = flags[attr]
    flags[attr] = not on
    return PromptSpec(spec.arity, **flags).traits, on


@dataclass(frozen=True)
class TraitTestRow:
    dataset: str
    model: str
    trait: str
    metric: str
    result: TTestResult


def trait_tests(rows: Sequence[MetricsRow]) -> list[TraitTestRow]:
    """For each trait, pair cells that differ only in that trait, matched by verb."""
    index = {(r.dataset, r.model, r.traits, r.verb): r for r in rows if r.model != "UR"}
    out = []
    for ds, model in sorted({(r.dataset, r.model) for r in index.values()}):
        for trait in ("3way", *TRAITS):
            pairs = []
            for (d_, m_, traits, verb), r in index.items():
                if (d_, m_) != (ds, model):
                    continue
                other, on = _toggle(traits, trait)
                partner = index.get((ds, model, other, verb))
                if on and partner is not None:
                    pairs.append((traits, verb, r, partner))
            if len(pairs) < 2:
                continue
            pairs.sort(key=lambda p: (p[0], p[1]))
            for metric in METRIC_NAMES:
                on_vals = [getattr(p[2], metric) for p in pairs]
                off_vals = [getattr(p[3], metric) for p in pairs]
                if any(v is None for v in on_vals + off_vals):
                    continue
                out.append(TraitTestRow(ds, model, trait, metric, paired_trait_test(on_vals, off_vals)))
    return out
