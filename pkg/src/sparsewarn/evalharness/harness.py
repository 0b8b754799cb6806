"""Stratified k-fold protocol, cumulative confusion and scoring times."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..datastore import load_features, stratified_kfold
from ..errors import ConfigError, DataError
from .methods import fit_method
from .metrics import ConfusionMatrix, confusion_from_predictions, metrics


@dataclass
class FoldResult:
    fold: int
    confusion: ConfusionMatrix
    report: object  # MetricReport
    test_index: np.ndarray
    predictions: np.ndarray
    score_seconds: float
    fit_seconds: float
    info: dict = field(default_factory=dict)
    model: object = None


@dataclass
class EvalReport:
    method: str
    folds: list
    confusion: ConfusionMatrix  # cumulative over folds
    overall: object  # MetricReport of the cumulative matrix
    config_echo: str = ""

    @property
    def score_seconds(self):
        return [f.score_seconds for f in self.folds]

    @property
    def mean_score_seconds(self):
        return float(np.mean(self.score_seconds))

    def mean_metrics(self):
        """Per-fold rates averaged over the folds where they are defined."""
        out = {}
        for name in ("accuracy", "sensitivity", "specificity"):
            vals = [getattr(f.report, name) for f in self.folds if getattr(f.report, name) is not None]
            out[name] = float(np.mean(vals)) if vals else None
        return out


def _check_config(cfg, ds, method):
    C = ds.n_classes
    if not 0 <= cfg.positive_class < C:
        raise ConfigError(f"positive_class {cfg.positive_class} outside [0, {C})")
    if method == "svm" and C != 2:
        raise ConfigError("svm supports two classes only")
    if cfg.pca_m is not None and cfg.pca_m > ds.d:
        raise ConfigError(f"pca_m={cfg.pca_m} exceeds the feature dimension {ds.d}")


def run_cv(cfg, dataset=None, method=None, keep_models=False):
    """Fit and score ``method`` (default: the config's first method) on every
    fold; the training split alone drives all fitting.

    Fold ``f`` uses seed ``cfg.seed + f`` for balancing, atom selection,
    network initialization and shuffling. Only ``model.predict`` on the test
    split is timed.
    """
    method = method or cfg.method
    ds = dataset if dataset is not None else load_features(cfg.dataset, cfg.format)
    _check_config(cfg, ds, method)
    plan = stratified_kfold(ds, cfg.folds, cfg.seed)
    for f in range(cfg.folds):
        train_idx = plan.train_index(f)
        present = np.unique(ds.labels[train_idx])
        if present.size != ds.n_classes:
            raise DataError(f"fold {f + 1}: training split lacks some classes")

    def one(f):
        tr, te = plan.split(f)
        train, test = ds.subset(tr), ds.subset(te)
        t0 = time.perf_counter()
        model = fit_method(method, train, cfg, plan.fold_seed(f))
        t1 = time.perf_counter()
        pred = model.predict(test.samples)
        t2 = time.perf_counter()
        cm = confusion_from_predictions(test.labels, pred, cfg.positive_class)
        return FoldResult(
            fold=f + 1, confusion=cm, report=metrics(cm), test_index=te, predictions=pred,
            score_seconds=t2 - t1, fit_seconds=t1 - t0, info=model.info,
            model=model if keep_models else None,
        )

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            folds = list(pool.map(one, range(cfg.folds)))
    else:
        folds = [one(f) for f in range(cfg.folds)]
    total = ConfusionMatrix()
    for fr in folds:
        total = total + fr.confusion
    return EvalReport(method, folds, total, metrics(total), cfg.echo())


def benchmark_time(reports):
    """One row per method: scoring seconds (mean, min, max over folds) and
    the cumulative sensitivity."""
    rows = []
    for r in reports:
        secs = r.score_seconds
        rows.append({
            "method": r.method,
            "mean_seconds": float(np.mean(secs)),
            "min_seconds": float(np.min(secs)),
            "max_seconds": float(np.max(secs)),
            "sensitivity": r.overall.sensitivity,
        })
    return rows
