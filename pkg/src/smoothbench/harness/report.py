"""Benchmark result persistence (JSONL) and report construction (JSON + CSV)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from typing import Dict, List, Optional, Tuple

import numpy as np

from .nested_cv import FoldResult
from .stats import friedman_test, matched_gap_wins, nemenyi_cd, rank_matrix

SCHEMA_VERSION = 1

# timing fields are masked when comparing runs for determinism
TIMING_FIELDS = ("tune_seconds", "train_seconds", "predict_ms_per_1k")

# smooth-side models for the gap analysis; the tree side is the dt baseline
SMOOTH_MODELS = ("chebypoly", "chebytree", "erbf")
TREE_MODELS = ("dt",)


def write_results_jsonl(
    path: str,
    fold_results: List[FoldResult],
    failures: Dict[Tuple[str, str], str],
) -> None:
    """One JSON object per line: fold records first, then failure records.

    Records are sorted by (dataset, model, fold) so the file bytes are
    independent of execution order.
    """
    fold_lines = sorted(fold_results, key=lambda fr: (fr.dataset, fr.model, fr.fold))
    with open(path, "w", encoding="utf-8") as fh:
        for fr in fold_lines:
            rec = {"record": "fold", "schema_version": SCHEMA_VERSION}
            rec.update(asdict(fr))
            fh.write(json.dumps(rec, sort_keys=False) + "\n")
        for (ds_name, model) in sorted(failures):
            rec = {
                "record": "failure",
                "schema_version": SCHEMA_VERSION,
                "dataset": ds_name,
                "model": model,
                "error": failures[(ds_name, model)],
            }
            fh.write(json.dumps(rec) + "\n")


def read_results_jsonl(path: str) -> Tuple[List[FoldResult], Dict[Tuple[str, str], str]]:
    fold_results: List[FoldResult] = []
    failures: Dict[Tuple[str, str], str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("schema_version") != SCHEMA_VERSION:
                raise ValueError(f"unsupported results schema: {rec.get('schema_version')}")
            if rec["record"] == "fold":
                fold_results.append(FoldResult(
                    dataset=rec["dataset"], model=rec["model"], fold=int(rec["fold"]),
                    train_r2=float(rec["train_r2"]), test_r2=float(rec["test_r2"]),
                    test_r2_adj=float(rec["test_r2_adj"]), gap=float(rec["gap"]),
                    tune_seconds=float(rec["tune_seconds"]),
                    train_seconds=float(rec["train_seconds"]),
                    predict_ms_per_1k=float(rec["predict_ms_per_1k"]),
                    best_params=dict(rec["best_params"]),
                ))
            elif rec["record"] == "failure":
                failures[(rec["dataset"], rec["model"])] = rec["error"]
            else:
                raise ValueError(f"unknown record type {rec['record']!r}")
    return fold_results, failures


def build_report(
    fold_results: List[FoldResult],
    failures: Dict[Tuple[str, str], str],
    dataset_order: Optional[List[str]] = None,
    model_order: Optional[List[str]] = None,
) -> dict:
    """Aggregate fold records into the benchmark report structure.

    Mean adjusted test R^2 and mean gap per (dataset, model); average ranks
    per dataset with failures pinned to the worst rank; Friedman test and
    Nemenyi critical difference where defined; matched-accuracy gap analysis
    when at least 2 models and 3 datasets are present.
    """
    datasets = dataset_order or _first_seen(
        [fr.dataset for fr in fold_results] + [k[0] for k in failures])
    models = model_order or _first_seen(
        [fr.model for fr in fold_results] + [k[1] for k in failures])

    by_pair: Dict[Tuple[str, str], List[FoldResult]] = {}
    for fr in fold_results:
        by_pair.setdefault((fr.dataset, fr.model), []).append(fr)

    scores: Dict[str, Dict[str, Optional[float]]] = {}
    gaps: Dict[str, Dict[str, Optional[float]]] = {}
    failed: Dict[str, Dict[str, bool]] = {}
    for ds_name in datasets:
        scores[ds_name] = {}
        gaps[ds_name] = {}
        failed[ds_name] = {}
        for m in models:
            frs = by_pair.get((ds_name, m), [])
            is_failed = (ds_name, m) in failures or not frs
            failed[ds_name][m] = is_failed
            if frs:
                scores[ds_name][m] = float(np.mean([fr.test_r2_adj for fr in frs]))
                gaps[ds_name][m] = float(np.mean([fr.gap for fr in frs]))
            else:
                scores[ds_name][m] = None
                gaps[ds_name][m] = None

    k = len(models)
    n_ds = len(datasets)
    score_table = np.array(
        [[(scores[d][m] if scores[d][m] is not None else -np.inf) for m in models]
         for d in datasets], dtype=np.float64)
    failed_table = np.array(
        [[failed[d][m] for m in models] for d in datasets], dtype=bool)
    ranks = rank_matrix(score_table, failed_table) if n_ds and k else np.zeros((0, k))
    mean_ranks = {m: float(ranks[:, j].mean()) for j, m in enumerate(models)} if n_ds else {}
    rank1 = {m: int(np.sum(ranks[:, j] == 1.0)) for j, m in enumerate(models)}
    rank2 = {m: int(np.sum(ranks[:, j] == 2.0)) for j, m in enumerate(models)}

    friedman = None
    if k >= 2 and n_ds >= 2 and (k - 1) <= 10:
        fr_res = friedman_test(ranks)
        friedman = {
            "statistic": fr_res.statistic,
            "df": fr_res.df,
            "critical_value": fr_res.critical_value,
            "significant": fr_res.significant,
        }
    cd = nemenyi_cd(k, n_ds) if (2 <= k <= 10 and n_ds >= 1) else None

    matched = None
    pairs = [(s, t) for s in SMOOTH_MODELS if s in models
             for t in TREE_MODELS if t in models]
    if k >= 2 and n_ds >= 3 and pairs:
        summaries = matched_gap_wins(scores, gaps, pairs)
        matched = {
            "threshold": 0.02,
            "pairs": [
                {
                    "smooth": s.smooth, "tree": s.tree, "matched": s.matched,
                    "smooth_wins": s.smooth_wins, "fraction": s.fraction,
                }
                for s in summaries
            ],
            "matched_total": int(sum(s.matched for s in summaries)),
            "smooth_wins_total": float(sum(s.smooth_wins for s in summaries)),
        }
        total = matched["matched_total"]
        matched["fraction_overall"] = (
            matched["smooth_wins_total"] / total if total else None)

    # fsum is exactly rounded, so these means do not depend on record order
    # (a report rebuilt from sorted JSONL must equal the original)
    timing: Dict[str, dict] = {}
    for m in models:
        frs = [fr for fr in fold_results if fr.model == m]
        if frs:
            timing[m] = {
                "tune_seconds_mean": math.fsum(fr.tune_seconds for fr in frs) / len(frs),
                "train_seconds_mean": math.fsum(fr.train_seconds for fr in frs) / len(frs),
                "predict_ms_per_1k_mean": math.fsum(fr.predict_ms_per_1k for fr in frs) / len(frs),
            }

    return {
        "schema_version": SCHEMA_VERSION,
        "datasets": list(datasets),
        "models": list(models),
        "scores": scores,
        "gaps": gaps,
        "ranks": {d: {m: float(ranks[i, j]) for j, m in enumerate(models)}
                  for i, d in enumerate(datasets)},
        "mean_ranks": mean_ranks,
        "rank1_counts": rank1,
        "rank2_counts": rank2,
        "friedman": friedman,
        "nemenyi_cd": cd,
        "matched_gap": matched,
        "failures": {f"{d}/{m}": msg for (d, m), msg in sorted(failures.items())},
        "timing": timing,
    }


def _first_seen(items: List[str]) -> List[str]:
    seen: Dict[str, None] = {}
    for item in items:
        seen.setdefault(item, None)
    return list(seen)


def report_model_columns(report: dict) -> List[str]:
    """Models sorted by mean rank ascending (name breaks ties)."""
    mean_ranks = report["mean_ranks"]
    return sorted(report["models"], key=lambda m: (mean_ranks.get(m, float("inf")), m))


def write_report_files(out_dir: str, report: dict) -> List[str]:
    """Write report.json plus rank/score CSV tables; returns the paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    paths.append(report_path)

    cols = report_model_columns(report)
    rank_path = os.path.join(out_dir, "rank_table.csv")
    with open(rank_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset"] + cols)
        for d in report["datasets"]:
            writer.writerow([d] + [repr(report["ranks"][d][m]) for m in cols])
    paths.append(rank_path)

    scores_path = os.path.join(out_dir, "scores_table.csv")
    with open(scores_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset"] + cols)
        for d in report["datasets"]:
            row = [d]
            for m in cols:
                v = report["scores"][d][m]
                row.append("" if v is None else repr(v))
            writer.writerow(row)
    paths.append(scores_path)
    return paths
