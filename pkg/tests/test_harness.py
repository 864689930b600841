import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import paired_t_oracle, t_interval_oracle

from causal_priors.harness import cli, report
from causal_priors.harness.config import ConfigError, ExperimentConfig, SearchSection, config_from_dict, load_config
from causal_priors.harness.runner import (
    CurvePoint,
    ExpertSource,
    MissingQueryCacheError,
    RunResult,
    RunSpec,
    best_tau_table,
    context_of,
    derive_seed,
    discovery_curves,
    discovery_specs,
    execute_runs,
    fingerprint,
    greedy_table,
    run_discovery_suite,
    run_greedy_suite,
    run_metrics_suite,
    trait_tests,
)
from causal_priors.harness.stats import paired_t_test, t_interval


def small(**kw):
    base = dict(
        datasets=("asia",),
        verbs=("causes", "leads to"),
        seeds_per_verb=2,
        search=SearchSection(tau_grid=(0.01, 1.0), budget_grid=(1,)),
    )
    base.update(kw)
    return ExperimentConfig(**base)


# --- statistics -----------------------------------------------------------

def test_paired_t_known_case():
    diffs = [0.1, -0.2, 0.3, 0.05, 0.15]
    res = paired_t_test(diffs, [0.0] * 5)
    mean, t, p = paired_t_oracle(diffs, [0.0] * 5)
    assert res.mean_diff == pytest.approx(0.08, abs=1e-12)
    assert res.t == pytest.approx(t, abs=1e-9)
    assert res.p == pytest.approx(p, abs=1e-9)
    assert not res.significant


def test_paired_t_degenerate():
    zero = paired_t_test([1, 2, 3], [1, 2, 3])
    assert zero.p == 1.0 and not zero.significant and math.isnan(zero.t)
    const = paired_t_test([2, 2, 2, 2], [1, 1, 1, 1])
    assert const.t == math.inf and const.p == 0.0 and const.significant
    with pytest.raises(ValueError):
        paired_t_test([1.0], [0.0])
    with pytest.raises(ValueError):
        paired_t_test([1.0, 2.0], [0.0])


def test_interval_known_case():
    iv = t_interval([1, 2, 3, 4, 5])
    assert iv.mean == 3.0
    # t_{0.975, 4} * sqrt(2.5) / sqrt(5)
    assert iv.half_width == pytest.approx(2.7764451051977987 * math.sqrt(0.5), abs=1e-12)
    assert math.isnan(t_interval([4.0]).half_width)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=25), st.integers(0, 2**31))
def test_stats_match_oracle(a, seed):
    b = list(np.random.default_rng(seed).normal(size=len(a)))
    if len(set(x - y for x, y in zip(a, b))) < 2:
        return
    res = paired_t_test(a, b)
    mean, t, p = paired_t_oracle(a, b)
    assert res.mean_diff == pytest.approx(mean, abs=1e-9)
    assert res.t == pytest.approx(t, rel=1e-9, abs=1e-9)
    assert res.p == pytest.approx(p, abs=1e-9)
    iv = t_interval(a)
    if len(set(a)) > 1:
        m, h = t_interval_oracle(a)
        assert iv.mean == pytest.approx(m, abs=1e-9) and iv.half_width == pytest.approx(h, rel=1e-9, abs=1e-9)


# --- configuration -----------------------------------------------------------

def test_yaml_config(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(
        "datasets: [asia, child]\n"
        "seeds_per_verb: 3\n"
        "search:\n  tau_grid: [1e-5, 0.5]\n  budget_grid: [1, 10]\n"
        "expert:\n  mode: mock\n  synthetic:\n    p_correct: 0.8\n"
    )
    cfg = load_config(path)
    assert cfg.datasets == ("asia", "child")
    assert cfg.search.tau_grid == (1e-5, 0.5)
    assert cfg.expert.mode == "mock" and cfg.expert.synthetic.p_correct == 0.8
    assert cfg.runs_per_cell == 60
    assert load_config(None) == ExperimentConfig()


@pytest.mark.parametrize("raw", [
    {"datasets": ["nope"]},
    {"priors": ["XX"]},
    {"bogus": 1},
    {"search": {"tau_grid": [0]}},
    {"expert": {"mode": "cache"}},
    {"verbs": ["teleports"]},
    {"prompt": "4way"},
])
def test_config_rejects(raw):
    with pytest.raises((ConfigError, ValueError)):
        config_from_dict(raw)


# --- seeds and fingerprints ---------------------------------------------------

def test_derive_seed_coordinates():
    s = derive_seed(0, 0, 0)
    assert s == derive_seed(0, 0, 0)
    assert len({s, derive_seed(1, 0, 0), derive_seed(0, 1, 0), derive_seed(0, 0, 1)}) == 4
    seeds = {derive_seed(0, v, r) for v in range(20) for r in range(10)}
    assert len(seeds) == 200 and all(0 <= x < 2**63 for x in seeds)


def test_fingerprints():
    cfg = small()
    specs = discovery_specs(cfg)
    ctx = context_of(cfg)
    fps = [fingerprint(s, ctx) for s in specs]
    assert len(set(fps)) == len(fps)
    assert fps == [fingerprint(s, context_of(small())) for s in specs]
    assert fingerprint(specs[0], context_of(small(n=500))) != fps[0]


def test_ur_runs_once_per_budget():
    specs = discovery_specs(small(priors=("UR", "LLM")))
    ur = [s for s in specs if s.prior == "UR"]
    assert {s.tau for s in ur} == {None} and len(ur) == 4
    assert len(specs) == 4 + 2 * 4


# --- execution -----------------------------------------------------------------

def test_parallel_equals_serial(tmp_path):
    cfg = small(priors=("UR", "combined"))
    serial = run_discovery_suite(cfg)
    parallel = run_discovery_suite(cfg.replace(workers=2))
    assert [r.record() for r in serial] == [r.record() for r in parallel]


def test_greedy_suite_and_table():
    cfg = small(priors=("UR", "MI", "LLM"))
    res = run_greedy_suite(cfg)
    assert len(res) == 3 * cfg.runs_per_cell
    (row,) = greedy_table(res)
    assert row["dataset"] == "asia" and row["UR_n"] == 4 and row["combined"] is None
    assert all(r.n_edges == 8 for r in res)


def test_report_is_byte_identical(tmp_path):
    cfg = small(priors=("UR", "LLM"))
    res = run_discovery_suite(cfg)
    paths_a = report.write_discovery_report(res, tmp_path / "a", ["asia"])
    again = report.read_runs_jsonl(tmp_path / "a" / "runs.jsonl")
    paths_b = report.write_discovery_report(again, tmp_path / "b", ["asia"])
    for pa, pb in zip(paths_a, paths_b):
        assert pa.name == pb.name and pa.read_bytes() == pb.read_bytes()
    fig = json.loads((tmp_path / "a" / "fig3_asia.json").read_text())
    assert fig["dataset"] == "asia" and fig["baseline"]


def test_empty_report_has_headers(tmp_path):
    assert report.table3_csv([]).startswith("dataset,")
    assert report.table3_csv([]).count("\n") == 1
    assert report.table1_csv([]).count("\n") == 1
    report.write_report([], tmp_path)
    assert (tmp_path / "table1.csv").exists()


def _point(prior, tau, score, shd_mean, budget=1):
    return CurvePoint("asia", prior, budget, tau, 10, score, 0.0, shd_mean, 0.0)


def test_best_tau_is_chosen_by_score():
    curves = [
        _point("UR", None, 100.0, 10.0),
        _point("LLM", 0.01, 90.0, 6.0),  # best score
        _point("LLM", 1.0, 95.0, 2.0),  # best SHD, but not the pick
    ]
    rows = {r.prior: r for r in best_tau_table(curves)}
    assert rows["LLM"].best_tau == 0.01
    assert rows["LLM"].pct_decrease == pytest.approx(40.0)
    assert rows["UR"].pct_decrease == 0.0


def test_curves_from_results():
    s = RunSpec("cduct", "asia", "UR", "causes", 0, None, None, 1)
    rs = [RunResult(s, f"f{k}", k, shd, 10.0 + k, 1) for k, shd in enumerate([3, 5])]
    (c,) = discovery_curves(rs)
    assert c.shd_mean == 4.0 and c.score_mean == 10.5 and c.n == 2


# --- metrics suite ---------------------------------------------------------

def test_metrics_suite(tmp_path):
    cfg = small(verbs=("causes", "leads to", "results in"))
    res = run_metrics_suite(cfg)
    ur = [c for c in res.cells if c.model == "UR"]
    assert len(res.cells) == 17 and len(ur) == 1
    assert (ur[0].means["fco"], ur[0].means["tere"], ur[0].means["tene"]) == (0.5, 8.0, 0.2)
    # the default synthetic expert is coherent
    assert all(r.lod == 0.0 for r in res.rows)
    tests = trait_tests(res.rows)
    assert {t.trait for t in tests} == {"3way", "varlist", "example", "priming"}
    assert all(t.result.n == 8 * 3 for t in tests)
    paths = report.write_metrics_report(res.cells, res.rows, tests, tmp_path)
    assert {p.name for p in paths} == {"metrics.csv", "metrics_per_verb.csv", "trait_tests.csv"}


def test_cache_mode_raises_on_miss(tmp_path):
    cfg = small(expert=config_from_dict({"expert": {"mode": "cache", "cache": str(tmp_path / "q.jsonl")}}).expert)
    with pytest.raises(MissingQueryCacheError):
        run_metrics_suite(cfg.replace(prompt_grid=("3way",)))


def test_mock_endpoint_fills_cache_and_matches_synthetic(tmp_path):
    cache = tmp_path / "q.jsonl"
    mock = small(verbs=("causes",), prompt_grid=("3way",))
    mock = mock.replace(expert=config_from_dict({"expert": {"mode": "mock", "cache": str(cache)}}).expert)
    direct = run_metrics_suite(small(verbs=("causes",), prompt_grid=("3way",)))
    via_http = run_metrics_suite(mock)
    assert [r.fco for r in via_http.rows] == [r.fco for r in direct.rows]
    # a warm cache now serves the cache-only mode
    cached = mock.replace(expert=config_from_dict({"expert": {"mode": "cache", "cache": str(cache)}}).expert)
    assert [r.tere for r in run_metrics_suite(cached).rows] == [r.tere for r in direct.rows]


# --- command line ------------------------------------------------------------

def test_cli_end_to_end(tmp_path, capsys):
    out = tmp_path / "res"
    common = ["--dataset", "asia", "--verbs", "1", "--seeds-per-verb", "2", "--out", str(out)]
    assert cli.main(["sample", "--dataset", "asia", "-n", "50", "--out", str(tmp_path / "a.csv")]) == 0
    assert (tmp_path / "a.csv").read_text().count("\n") == 51
    assert cli.main(["query", *common, "--single-prompt", "--expert", "mock", "--cache", str(out / "q.jsonl")]) == 0
    assert cli.main(["priors", *common]) == 0
    assert cli.main(["metrics", *common, "--single-prompt"]) == 0
    assert cli.main(["greedy", *common]) == 0
    assert cli.main(["discover", *common, "--prior", "LLM", "--tau", "0.01", "--budget", "1", "--save-graphs"]) == 0
    table3 = (out / "table3.csv").read_bytes()
    assert cli.main(["report", str(out / "runs.jsonl")]) == 0
    assert (out / "table3.csv").read_bytes() == table3
    assert list((out / "graphs").glob("*.txt"))
    assert cli.main(["greedy", "--dataset", "asia", "--config", str(tmp_path / "missing.yaml")]) == 2
