"""Deterministic CSV/JSON artifacts from run results.

Floats are written with ``repr`` and rows in a fixed order, so identical
inputs give byte-identical files. Timing is never written.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Sequence

from .runner import (
    METRIC_NAMES,
    TABLE_KINDS,
    CurvePoint,
    MetricsCell,
    MetricsRow,
    RunResult,
    TraitTestRow,
    best_tau_table,
    discovery_curves,
    greedy_table,
)

TABLE1_FIELDS = ["dataset", *TABLE_KINDS, *(f"{k}_n" for k in TABLE_KINDS)]
TABLE3_FIELDS = ["dataset", "prior", "budget", "best_tau", "score_mean", "shd_mean", "ur_shd_mean", "pct_decrease"]
METRICS_FIELDS = ["dataset", "model", "traits", "n"] + [
    f"{m}{s}" for m in METRIC_NAMES for s in ("", "_ci_low", "_ci_high")
]
TRAIT_TEST_FIELDS = ["dataset", "model", "trait", "metric", "n", "mean_diff", "t", "p", "significant"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_num(v):
    # strict JSON has no NaN/inf
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None
    return v


def _csv(fields: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_fmt(row.get(f)) for f in fields])
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def table1_csv(results: Sequence[RunResult]) -> str:
    return _csv(TABLE1_FIELDS, greedy_table(results))


def table3_csv(results: Sequence[RunResult]) -> str:
    rows = sorted(
        best_tau_table(discovery_curves(results)),
        key=lambda r: (r.dataset, TABLE_KINDS.index(r.prior) if r.prior in TABLE_KINDS else 99, r.prior, r.budget),
    )
    return _csv(TABLE3_FIELDS, [r.__dict__ for r in rows])


def fig3_json(curves: Sequence[CurvePoint], dataset: str) -> str:
    """Plot data: per (prior, budget) one score series and one SHD series over tau."""
    series = []
    baselines = []
    keys = []
    for c in curves:
        if c.dataset == dataset and (c.prior, c.budget) not in keys:
            keys.append((c.prior, c.budget))
    for prior, budget in keys:
        pts = [c for c in curves if c.dataset == dataset and c.prior == prior and c.budget == budget]
        for metric in ("score", "shd"):
            data = [
                {
                    "x": _json_num(c.tau),
                    "y": _json_num(getattr(c, f"{metric}_mean")),
                    "ci_low": _json_num(getattr(c, f"{metric}_mean") - getattr(c, f"{metric}_half")),
                    "ci_high": _json_num(getattr(c, f"{metric}_mean") + getattr(c, f"{metric}_half")),
                    "n": c.n,
                }
                for c in pts
            ]
            entry = {"prior": prior, "budget": budget, "metric": metric, "points": data}
            (baselines if prior == "UR" else series).append(entry)
    doc = {"dataset": dataset, "series": series, "baseline": baselines}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def runs_jsonl(results: Sequence[RunResult]) -> str:
    recs = sorted((r.record() for r in results), key=lambda r: r["fingerprint"])
    return "".join(json.dumps({k: _json_num(v) for k, v in rec.items()}, sort_keys=True) + "\n" for rec in recs)


def read_runs_jsonl(path: str | Path) -> list[RunResult]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rec = json.loads(line)
            if rec.get("score") is None:
                rec["score"] = math.nan
            out.append(RunResult.from_record(rec))
    return out


def metrics_csv(cells: Sequence[MetricsCell]) -> str:
    rows = []
    for c in sorted(cells, key=lambda c: (c.dataset, c.model != "UR", c.model, c.traits)):
        row = {"dataset": c.dataset, "model": c.model, "traits": c.traits, "n": c.n}
        for m in METRIC_NAMES:
            mean, half = c.means[m], c.halves[m]
            row[m] = mean
            if half is None or math.isnan(half):
                low = high = None
            else:
                low, high = mean - half, mean + half
            row[f"{m}_ci_low"], row[f"{m}_ci_high"] = low, high
        rows.append(row)
    return _csv(METRICS_FIELDS, rows)


def metrics_rows_csv(rows: Sequence[MetricsRow]) -> str:
    fields = ["dataset", "model", "traits", "verb", *METRIC_NAMES]
    ordered = sorted(rows, key=lambda r: (r.dataset, r.model != "UR", r.model, r.traits, r.verb))
    return _csv(fields, [r.__dict__ for r in ordered])


def trait_tests_csv(tests: Sequence[TraitTestRow]) -> str:
    rows = []
    for t in sorted(tests, key=lambda t: (t.dataset, t.model, t.trait, t.metric)):
        r = t.result
        rows.append(
            {"dataset": t.dataset, "model": t.model, "trait": t.trait, "metric": t.metric, "n": r.n,
             "mean_diff": r.mean_diff, "t": r.t, "p": r.p, "significant": r.significant}
        )
    return _csv(TRAIT_TEST_FIELDS, rows)


def write_greedy_report(results: Sequence[RunResult], out: str | Path) -> list[Path]:
    out = Path(out)
    return [_write(out / "table1.csv", table1_csv(results)), _write(out / "runs.jsonl", runs_jsonl(results))]


def write_discovery_report(results: Sequence[RunResult], out: str | Path, datasets: Sequence[str] = ()) -> list[Path]:
    out = Path(out)
    curves = discovery_curves(results)
    paths = [_write(out / "table3.csv", table3_csv(results)), _write(out / "runs.jsonl", runs_jsonl(results))]
    for ds in sorted(set(datasets) | {c.dataset for c in curves}):
        paths.append(_write(out / f"fig3_{ds}.json", fig3_json(curves, ds)))
    return paths


def write_metrics_report(cells, rows, tests, out: str | Path) -> list[Path]:
    out = Path(out)
    return [
        _write(out / "metrics.csv", metrics_csv(cells)),
        _write(out / "metrics_per_verb.csv", metrics_rows_csv(rows)),
        _write(out / "trait_tests.csv", trait_tests_csv(tests)),
    ]


def write_report(results: Sequence[RunResult], out: str | Path, datasets: Sequence[str] = ()) -> list[Path]:
    """Emit every results-derived artifact; empty result sets give header-only tables."""
    out = Path(out)
    curves = discovery_curves(results)
    paths = [
        _write(out / "table1.csv", table1_csv(results)),
        _write(out / "table3.csv", table3_csv(results)),
        _write(out / "runs.jsonl", runs_jsonl(results)),
    ]
    for ds in sorted(set(datasets) | {c.dataset for c in curves}):
        paths.append(_write(out / f"fig3_{ds}.json", fig3_json(curves, ds)))
    return paths
