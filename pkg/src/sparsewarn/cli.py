"""Command-line entry point: ``sparsewarn {eval,bench,synth,inspect}``.

Exit status 0 on success, 2 for configuration errors, 3 for data errors and
4 for numerical failures; failures print one diagnostic line on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time

import numpy as np
import scipy

from . import __version__
from .config import METHODS, load_config
from .container import inspect_model, save_model
from .datastore import load_features, save_features
from .errors import ConfigError, DataError, NumericalError, SparsewarnError
from .evalharness import (
    benchmark_csv, benchmark_time, predictions_csv, report_csv, report_text, run_cv,
)
from .synth import synth_dataset


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_dataset(cfg):
    if not os.path.isfile(cfg.dataset):
        raise DataError(f"dataset file not found: {cfg.dataset}")
    return load_features(cfg.dataset, cfg.format)


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _manifest(cfg, stages, reports, wall):
    return {
        "command_version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "config": cfg.echo(),
        "dataset_sha256": _sha256(cfg.dataset),
        "seeds": {"master": cfg.seed, "folds": [cfg.seed + f for f in range(cfg.folds)]},
        "stage_seconds": stages,
        "total_seconds": wall,
        "methods": {
            r.method: {
                "folds": [
                    {"fold": f.fold, "fit_seconds": f.fit_seconds, "score_seconds": f.score_seconds,
                     "info": f.info}
                    for f in r.folds
                ]
            }
            for r in reports
        },
    }


def _evaluate(cfg, methods, keep_models=False):
    start = time.perf_counter()
    stages = {}
    t = time.perf_counter()
    ds = _load_dataset(cfg)
    stages["load"] = time.perf_counter() - t
    reports = []
    for m in methods:
        t = time.perf_counter()
        reports.append(run_cv(cfg, ds, m, keep_models=keep_models))
        stages[m] = time.perf_counter() - t
    return ds, reports, stages, time.perf_counter() - start


def cmd_eval(config_path):
    cfg = load_config(config_path)
    ds, reports, stages, wall = _evaluate(cfg, cfg.methods, keep_models=cfg.save_model)
    os.makedirs(cfg.output, exist_ok=True)
    _write(os.path.join(cfg.output, "report.txt"), report_text(reports, ds.class_names, cfg.positive_class))
    _write(os.path.join(cfg.output, "report.csv"), report_csv(reports, timing=cfg.report_timing))
    _write(os.path.join(cfg.output, "fig7.csv"), benchmark_csv(benchmark_time(reports)))
    _write(os.path.join(cfg.output, "predictions.csv"), "".join(
        predictions_csv(r) if i == 0 else predictions_csv(r).split("\n", 1)[1]
        for i, r in enumerate(reports)))
    skipped = []
    if cfg.save_model:
        for r in reports:
            if not any(k in r.folds[0].model.components for k in ("dictionary", "network")):
                skipped.append(r.method)  # the container holds no k-NN/SVM state
                continue
            for f in r.folds:
                path = os.path.join(cfg.output, f"model_{r.method}_fold{f.fold}.swrn")
                info = _jsonable({"method": r.method, "fold": f.fold, "config": cfg.echo(),
                                  "seed": cfg.seed + f.fold - 1, "info": f.info})
                save_model(path, f.model.components, info)
    manifest = _manifest(cfg, stages, reports, wall)
    if skipped:
        manifest["models_not_saved"] = skipped
    _write(os.path.join(cfg.output, "manifest.json"), json.dumps(_jsonable(manifest), indent=1) + "\n")
    return 0


def cmd_bench(config_path):
    cfg = load_config(config_path)
    if len(cfg.methods) < 2:
        raise ConfigError("bench needs at least two methods")
    _, reports, stages, wall = _evaluate(cfg, cfg.methods)
    os.makedirs(cfg.output, exist_ok=True)
    _write(os.path.join(cfg.output, "bench.csv"), benchmark_csv(benchmark_time(reports)))
    manifest = _manifest(cfg, stages, reports, wall)
    _write(os.path.join(cfg.output, "manifest.json"), json.dumps(_jsonable(manifest), indent=1) + "\n")
    return 0


def cmd_synth(args):
    try:
        per_class = [int(v) for v in args.per_class.split(",")]
    except ValueError:
        raise ConfigError(f"--per-class expects integers, got {args.per_class!r}") from None
    try:
        ds = synth_dataset(per_class, args.dim, args.sep, args.sigma, args.seed,
                           n_classes=args.classes, components=args.components)
    except ValueError as exc:
        raise ConfigError(f"synth: {exc}") from None
    save_features(ds, args.out, args.format)
    return 0


def cmd_inspect(path):
    if not os.path.isfile(path):
        raise DataError(f"model file not found: {path}")
    manifest = inspect_model(path)
    info = manifest.get("info", {})
    print(f"format version {manifest['format_version']}")
    for key in ("method", "fold", "seed"):
        if key in info:
            print(f"{key}: {info[key]}")
    for entry in manifest["components"]:
        shapes = ", ".join(f"{a['name']}{tuple(a['shape'])}" for a in entry["arrays"])
        print(f"{entry['kind']}: {shapes}")
        if entry["kind"] == "network":
            meta = entry["meta"]
            print(f"  {meta['name']}: {meta['param_count']} parameters, {len(meta['layers'])} layers")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="sparsewarn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"sparsewarn {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    e = sub.add_parser("eval", help="cross-validate the configured method(s) and write reports")
    e.add_argument("config")
    b = sub.add_parser("bench", help="scoring time versus sensitivity for several methods")
    b.add_argument("config")
    s = sub.add_parser("synth", help="write a Gaussian-mixture feature file")
    s.add_argument("--classes", type=int, default=2)
    s.add_argument("--per-class", default="500", help="one count, or comma-separated counts per class")
    s.add_argument("--dim", type=int, default=64)
    s.add_argument("--sep", type=float, default=3.0, help="class-mean distance in units of sigma")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--components", type=int, default=2, help="mixture components per class")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=("csv", "binary"))
    s.add_argument("--out", required=True)
    i = sub.add_parser("inspect", help="print a saved model's manifest")
    i.add_argument("model")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return cmd_eval(args.config)
        if args.command == "bench":
            return cmd_bench(args.config)
        if args.command == "synth":
            return cmd_synth(args)
        return cmd_inspect(args.model)
    except SparsewarnError as exc:
        code, message = exc.exit_code, str(exc) or type(exc).__name__
    except FileNotFoundError as exc:
        code, message = DataError.exit_code, f"file not found: {exc.filename}"
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        code, message = NumericalError.exit_code, str(exc) or type(exc).__name__
    except (OSError, ValueError) as exc:
        code, message = DataError.exit_code, str(exc) or type(exc).__name__
    print(f"sparsewarn: error: {message.splitlines()[0]}", file=sys.stderr)
    return code


__all__ = ["main", "cmd_eval", "cmd_bench", "cmd_synth", "cmd_inspect", "build_parser", "METHODS"]
