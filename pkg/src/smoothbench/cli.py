"""Command-line interface: fit, predict, gen, bench, report.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors (argparse's
own convention).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .data import Dataset, drop_quasi_constant, impute_median, inner_fold_count, kfold_split, load_csv, subsample, write_csv
from .harness import (
    BenchRunConfig,
    adjusted_r2,
    build_report,
    clip_predictions,
    r2,
    random_search,
    read_results_jsonl,
    run_benchmark,
    search_space,
    write_report_files,
    write_results_jsonl,
)
from .registry import MODEL_KINDS, fit_model, model_from_dict, model_to_dict, predict_model
from .synth import CATALOG, gen

MODEL_FILE_SCHEMA = 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothbench",
        description="Smooth-basis regression models and a nested-CV benchmark harness.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one model on a CSV dataset")
    p_fit.add_argument("--model", required=True, choices=MODEL_KINDS)
    p_fit.add_argument("--data", required=True, help="training CSV with a header row")
    p_fit.add_argument("--target", required=True, help="target column name")
    p_fit.add_argument("--out", required=True, help="output model JSON path")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--max-samples", type=int, default=None,
                       help="subsample the training data to at most this many rows")
    p_fit.add_argument("--tune", action="store_true",
                       help="pick hyperparameters by random search with inner CV")
    p_fit.add_argument("--budget", type=int, default=None,
                       help="override the trial budget used with --tune")
    p_fit.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="explicit hyperparameter (repeatable), e.g. --param alpha=0.5")
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="predict with a saved model JSON")
    p_pred.add_argument("--model-file", required=True)
    p_pred.add_argument("--data", required=True, help="CSV with the model's feature columns")
    p_pred.add_argument("--out", required=True, help="output CSV of predictions")
    p_pred.set_defaults(func=cmd_predict)

    p_gen = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p_gen.add_argument("--kind", required=True, choices=sorted(CATALOG))
    p_gen.add_argument("--n", type=int, default=None)
    p_gen.add_argument("--noise-std", type=float, default=None)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen)

    p_bench = sub.add_parser("bench", help="run the nested-CV benchmark from a config file")
    p_bench.add_argument("--config", required=True, help="JSON benchmark config")
    p_bench.add_argument("--out-dir", required=True)
    p_bench.add_argument("--parallel", type=int, default=None,
                         help="worker processes for outer folds (overrides config)")
    p_bench.set_defaults(func=cmd_bench)

    p_rep = sub.add_parser("report", help="rebuild report files from results.jsonl")
    p_rep.add_argument("--results", required=True)
    p_rep.add_argument("--out-dir", required=True)
    p_rep.add_argument("--models", default=None,
                       help="comma-separated subset of models to include")
    p_rep.set_defaults(func=cmd_report)
    return parser


# ---------------------------------------------------------------------------


def _parse_params(pairs: List[str]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"--param expects KEY=VALUE, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _tune_params(kind: str, X: np.ndarray, y: np.ndarray, seed: int,
                 budget: Optional[int], d: int) -> Dict[str, Any]:
    n = X.shape[0]
    plan = kfold_split(n, inner_fold_count(n), seed=seed)

    def objective(params: Dict[str, Any]) -> float:
        scores = []
        for fold in range(plan.outer_k):
            itr, ival = plan.train_indices(fold), plan.test_indices(fold)
            model = fit_model(kind, X[itr], y[itr], params, seed=seed)
            preds = clip_predictions(predict_model(kind, model, X[ival]), y[itr])
            scores.append(adjusted_r2(r2(y[ival], preds), len(ival), d))
        return float(np.mean(scores))

    best_params, _, _ = random_search(objective, search_space(kind), seed=seed, budget=budget)
    return best_params


def cmd_fit(args: argparse.Namespace) -> int:
    ds = load_csv(args.data, args.target)
    ds = drop_quasi_constant(ds)
    if args.max_samples is not None:
        ds = subsample(ds, args.max_samples, args.seed)
    ds = impute_median(ds, ds)
    medians = [float(np.median(ds.X[:, j])) for j in range(ds.d)]

    if args.tune:
        params = _tune_params(args.model, ds.X, ds.y, args.seed, args.budget, ds.d)
        params.update(_parse_params(args.param))  # explicit flags win
    else:
        params = _parse_params(args.param)
    model = fit_model(args.model, ds.X, ds.y, params, seed=args.seed)

    doc = {
        "schema_version": MODEL_FILE_SCHEMA,
        "kind": args.model,
        "target": ds.target_name,
        "feature_names": list(ds.feature_names),
        "medians": medians,
        "params": params,
        "tuned": bool(args.tune),
        "model": model_to_dict(args.model, model),
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    preds = clip_predictions(predict_model(args.model, model, ds.X), ds.y)
    print(f"fit {args.model} on {args.data}: n={ds.n} d={ds.d} "
          f"train_r2={r2(ds.y, preds):.4f} -> {args.out}")
    return 0


def _load_feature_matrix(path: str, feature_names: List[str]) -> np.ndarray:
    """Read the model's feature columns (by name) from a prediction CSV."""
    try:
        fh = open(path, "r", newline="", encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"dataset file not found: {path}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row")
        missing = [c for c in feature_names if c not in header]
        if missing:
            raise ValueError(f"{path}: missing feature columns {missing}")
        pos = [header.index(c) for c in feature_names]
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or (len(rec) == 1 and rec[0].strip() == ""):
                continue
            if len(rec) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} cells, got {len(rec)}")
            vals = []
            for c, p in zip(feature_names, pos):
                cell = rec[p].strip()
                if cell == "":
                    vals.append(math.nan)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: column {c!r} has non-numeric "
                                     f"value {cell!r}")
                vals.append(v if math.isfinite(v) else math.nan)
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def cmd_predict(args: argparse.Namespace) -> int:
    with open(args.model_file, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != MODEL_FILE_SCHEMA:
        raise ValueError(f"unsupported model file schema: {doc.get('schema_version')}")
    kind = doc["kind"]
    model = model_from_dict(kind, doc["model"])
    X = _load_feature_matrix(args.data, doc["feature_names"])
    medians = np.asarray(doc["medians"], dtype=np.float64)
    mask = np.isnan(X)
    X[mask] = np.broadcast_to(medians, X.shape)[mask]
    preds = predict_model(kind, model, X)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prediction"])
        for v in preds:
            writer.writerow([repr(float(v))])
    print(f"wrote {len(preds)} predictions -> {args.out}")
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    ds = gen(args.kind, n=args.n, noise_std=args.noise_std, seed=args.seed)
    write_csv(ds, args.out)
    print(f"generated {args.kind}: n={ds.n} d={ds.d} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------


def _load_bench_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if "datasets" not in cfg or not cfg["datasets"]:
        raise ValueError("bench config needs a non-empty 'datasets' list")
    models = cfg.get("models", list(MODEL_KINDS))
    for m in models:
        if m not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {m!r} in config; choose from {MODEL_KINDS}")
    cfg["models"] = models
    return cfg


def _materialize_dataset(entry: dict, max_samples: Optional[int], seed: int) -> Tuple[str, Dataset]:
    if "synthetic" in entry:
        kind = entry["synthetic"]
        name = entry.get("name", kind)
        ds = gen(kind, n=entry.get("n"), noise_std=entry.get("noise_std"),
                 seed=entry.get("seed", 0))
    elif "path" in entry:
        if "target" not in entry:
            raise ValueError(f"dataset entry for {entry['path']!r} needs a 'target'")
        name = entry.get("name") or os.path.splitext(os.path.basename(entry["path"]))[0]
        ds = load_csv(entry["path"], entry["target"])
    else:
        raise ValueError("each dataset entry needs either 'synthetic' or 'path'")
    ds = drop_quasi_constant(ds)
    if max_samples is not None:
        ds = subsample(ds, max_samples, seed)
    return name, ds


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _load_bench_config(args.config)
    run_config = BenchRunConfig(
        outer_k=int(cfg.get("outer_k", 5)),
        outer_seed=int(cfg.get("outer_seed", 42)),
        search_seed=int(cfg.get("search_seed", 0)),
        trial_budgets=cfg.get("trial_budgets"),
    )
    max_samples = cfg.get("max_samples")
    datasets = [
        _materialize_dataset(entry, max_samples, run_config.outer_seed)
        for entry in cfg["datasets"]
    ]
    names = [name for name, _ in datasets]
    if len(set(names)) != len(names):
        raise ValueError(f"dataset names must be unique, got {names}")
    parallel = args.parallel if args.parallel is not None else int(cfg.get("parallel", 1))

    results, failures = run_benchmark(datasets, cfg["models"], run_config,
                                      parallel=max(1, parallel))
    os.makedirs(args.out_dir, exist_ok=True)
    results_path = os.path.join(args.out_dir, "results.jsonl")
    write_results_jsonl(results_path, results, failures)
    report = build_report(results, failures, dataset_order=names,
                          model_order=list(cfg["models"]))
    write_report_files(args.out_dir, report)

    print(f"benchmark: {len(names)} dataset(s) x {len(cfg['models'])} model(s), "
          f"outer_k={run_config.outer_k}")
    for m in sorted(report["mean_ranks"], key=report["mean_ranks"].get):
        print(f"  {m}: mean rank {report['mean_ranks'][m]:.2f}")
    if failures:
        for (d, m), msg in failures.items():
            print(f"FAILED {d}/{m}: {msg}", file=sys.stderr)
        return 1
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    fold_results, failures = read_results_jsonl(args.results)
    if args.models:
        keep = [m.strip() for m in args.models.split(",") if m.strip()]
        fold_results = [fr for fr in fold_results if fr.model in keep]
        failures = {k: v for k, v in failures.items() if k[1] in keep}
        if not fold_results and not failures:
            raise ValueError(f"no records left after filtering to models {keep}")
    report = build_report(fold_results, failures)
    paths = write_report_files(args.out_dir, report)
    print("wrote " + ", ".join(paths))
    return 0


if __name__ == "__main__":
    sys.exit(main())
