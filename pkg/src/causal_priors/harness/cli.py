"""Command-line entry point; each pipeline stage is a subcommand."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..bayesnet import BUNDLED_NETWORKS, forward_sample, load_network, read_bif, write_dataset_csv
from ..discovery.io import save_graph
from ..expert.prompts import PromptSpec
from ..graph import Dag
from ..priors import aggregate_llm_prior, combine_hadamard, mi_prior, save_prior, uniform_prior
from . import report
from .config import PRIOR_KINDS, ExperimentConfig, load_config
from .runner import (
    ExpertSource,
    run_discovery_suite,
    run_greedy_suite,
    run_metrics_suite,
    trait_tests,
)

log = logging.getLogger("causal_priors")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML experiment config (defaults reproduce the full grids)")
    p.add_argument("--dataset", action="append", choices=BUNDLED_NETWORKS, help="restrict to dataset (repeatable)")
    p.add_argument("--prior", action="append", choices=PRIOR_KINDS, help="restrict to prior kind (repeatable)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--endpoint-env", action="store_true",
                   help="query a live endpoint from EXPERT_BASE_URL / EXPERT_API_KEY")
    p.add_argument("--expert", choices=("synthetic", "mock", "endpoint", "cache"), help="expert source mode")
    p.add_argument("--cache", help="query cache file (JSONL)")
    p.add_argument("--model", help="model id sent to the endpoint")
    p.add_argument("--prompt", help="prompt traits for priors, e.g. 3way+varlist")
    p.add_argument("--verbs", type=int, help="use only the first N verbs")
    p.add_argument("--seeds-per-verb", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    changes = {}
    if args.dataset:
        changes["datasets"] = tuple(args.dataset)
    if args.prior:
        changes["priors"] = tuple(args.prior)
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.out:
        changes["out"] = args.out
    if args.prompt:
        changes["prompt"] = args.prompt
    if args.verbs:
        changes["verbs"] = cfg.verbs[: args.verbs]
    if args.seeds_per_verb:
        changes["seeds_per_verb"] = args.seeds_per_verb
    if args.workers:
        changes["workers"] = args.workers
    expert = {}
    if args.endpoint_env:
        expert["mode"] = "endpoint"
    if args.expert:
        expert["mode"] = args.expert
    if args.cache:
        expert["cache"] = args.cache
    if args.model:
        expert["model_id"] = args.model
    if expert:
        changes["expert"] = replace(cfg.expert, **expert)
    search = {}
    if getattr(args, "tau", None):
        search["tau_grid"] = tuple(args.tau)
    if getattr(args, "budget", None):
        search["budget_grid"] = tuple(args.budget)
    if search:
        changes["search"] = replace(cfg.search, **search)
    return cfg.replace(**changes) if changes else cfg


def _say(paths) -> None:
    for p in paths:
        print(p)


def cmd_sample(args) -> int:
    bn = read_bif(args.bif) if args.bif else load_network(args.dataset[0] if args.dataset else "asia")
    data = forward_sample(bn, args.n, args.seed or 0)
    out = Path(args.out or f"{bn.name or 'network'}_n{args.n}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(data, out)
    print(out)
    return 0


def cmd_query(args) -> int:
    cfg = _config(args)
    if cfg.expert.mode == "synthetic" and not cfg.expert.cache:
        cfg = cfg.replace(expert=replace(cfg.expert, mode="mock"))
    if not cfg.expert.cache:
        cfg = cfg.replace(expert=replace(cfg.expert, cache=str(Path(cfg.out) / "queries.jsonl")))
    source = ExpertSource(cfg)
    grid = (cfg.prompt,) if args.single_prompt else cfg.prompt_grid
    for ds in cfg.datasets:
        bn = load_network(ds)
        for traits in grid:
            for verb in cfg.verbs:
                source.responses(ds, bn, PromptSpec.from_traits(traits, verb))
    print(f"{cfg.expert.cache}: {len(source.cache)} records")
    return 0


def cmd_priors(args) -> int:
    cfg = _config(args)
    source = ExpertSource(cfg)
    out = Path(cfg.out) / "priors"
    paths = []
    for ds in cfg.datasets:
        bn = load_network(ds)
        data = forward_sample(bn, cfg.n, cfg.dataset_seed)
        mi = mi_prior(data)
        for kind in cfg.priors:
            if kind == "UR":
                paths.append(_save(uniform_prior(bn.d), out / f"{ds}_UR.csv"))
            elif kind == "MI":
                paths.append(_save(mi, out / f"{ds}_MI.csv"))
            else:
                for verb in cfg.verbs:
                    resp = source.responses(ds, bn, PromptSpec.from_traits(cfg.prompt, verb))
                    llm = aggregate_llm_prior(resp, bn.d, cfg.expert.model_id, cfg.prompt)
                    prior = llm if kind == "LLM" else combine_hadamard(mi, llm)
                    paths.append(_save(prior, out / f"{ds}_{kind}_{cfg.prompt}_{verb.replace(' ', '-')}.csv"))
    _say(paths)
    return 0


def _save(prior, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    save_prior(prior, path)
    return path


def cmd_metrics(args) -> int:
    cfg = _config(args)
    if args.single_prompt:
        cfg = cfg.replace(prompt_grid=(cfg.prompt,))
    res = run_metrics_suite(cfg)
    _say(report.write_metrics_report(res.cells, res.rows, trait_tests(res.rows), cfg.out))
    return 0


def cmd_greedy(args) -> int:
    cfg = _config(args)
    results = run_greedy_suite(cfg)
    _say(report.write_greedy_report(results, cfg.out))
    return 0


def cmd_discover(args) -> int:
    cfg = _config(args)
    results = run_discovery_suite(cfg)
    paths = report.write_discovery_report(results, cfg.out, cfg.datasets)
    if args.save_graphs:
        gdir = Path(cfg.out) / "graphs"
        gdir.mkdir(parents=True, exist_ok=True)
        for r in results:
            d = load_network(r.spec.dataset).d
            g = Dag(d, frozenset(r.edges))
            save_graph(g, gdir / f"{r.fingerprint}.txt", score=r.score, shd=r.shd, config=r.record())
    _say(paths)
    return 0


def cmd_report(args) -> int:
    runs = Path(args.runs)
    results = report.read_runs_jsonl(runs) if runs.exists() else []
    out = args.out or str(runs.parent)
    _say(report.write_report(results, out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causal-priors", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a dataset CSV from a BIF network")
    p.add_argument("--bif", help="BIF file (default: a bundled network)")
    p.add_argument("--dataset", action="append", choices=BUNDLED_NETWORKS)
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("query", help="fill the query cache for the prompt grid")
    _common(p)
    p.add_argument("--single-prompt", action="store_true", help="only the --prompt traits, not the whole grid")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("priors", help="build and save prior matrices")
    _common(p)
    p.set_defaults(func=cmd_priors)

    p = sub.add_parser("metrics", help="prior-quality metrics over the prompt grid")
    _common(p)
    p.add_argument("--single-prompt", action="store_true")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("greedy", help="greedy top-m graphs; writes table1.csv")
    _common(p)
    p.set_defaults(func=cmd_greedy)

    p = sub.add_parser("discover", help="tree search sweeps; writes table3.csv and fig3 data")
    _common(p)
    p.add_argument("--tau", type=float, action="append", help="tau value (repeatable; default: full grid)")
    p.add_argument("--budget", type=int, action="append", help="budget multiplier (repeatable)")
    p.add_argument("--save-graphs", action="store_true", help="write an edge list and sidecar per run")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("report", help="rebuild tables and plot data from runs.jsonl")
    p.add_argument("runs", help="path to runs.jsonl")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
