"""Hyperparameter grids and inner stratified cross-validation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..datastore import stratified_kfold
from ..errors import StratificationError
from .knn import METRICS, knn_predict
from .svm import svm_train

GRID_POINTS = 7


def log_grid(lo, hi, points=GRID_POINTS):
    return tuple(float(v) for v in np.logspace(np.log10(lo), np.log10(hi), points))


def knn_k_grid(n_train, points=GRID_POINTS):
    """Unique log-spaced integers in ``[1, n_train / 2]``."""
    hi = max(1, n_train // 2)
    return tuple(int(k) for k in np.unique(np.round(np.geomspace(1, hi, points)).astype(int)))


@dataclass(frozen=True)
class GridSpec:
    """Search space for the two baselines.

    ``knn_k=None`` derives the k values from the inner training size. SVM
    kernels are ``"linear"``, ``"poly"`` (over ``svm_orders``) and ``"rbf"``
    (over ``svm_gamma``); all are crossed with ``svm_C``.
    """

    knn_k: tuple = None
    knn_metrics: tuple = METRICS
    svm_kernels: tuple = ("linear", "poly", "rbf")
    svm_orders: tuple = (2, 3, 4)
    svm_gamma: tuple = log_grid(1e-3, 1e3)
    svm_C: tuple = log_grid(1e-3, 1e3)

    def __post_init__(self):
        if self.knn_k is not None:
            ks = tuple(int(k) for k in self.knn_k)
            if not ks or min(ks) < 1 or len(set(ks)) != len(ks):
                raise ValueError("knn_k must be non-empty unique integers >= 1")
            object.__setattr__(self, "knn_k", ks)
        for name in ("knn_metrics", "svm_kernels", "svm_C"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if "poly" in self.svm_kernels and not self.svm_orders:
            raise ValueError("svm_orders must be non-empty when poly is searched")
        if "rbf" in self.svm_kernels and not self.svm_gamma:
            raise ValueError("svm_gamma must be non-empty when rbf is searched")
        unknown = set(self.knn_metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown k-NN metric(s) {sorted(unknown)}")
        unknown = set(self.svm_kernels) - {"linear", "poly", "rbf"}
        if unknown:
            raise ValueError(f"unknown SVM kernel(s) {sorted(unknown)}")

    def knn_points(self, n_train):
        ks = self.knn_k or knn_k_grid(n_train)
        return [(k, metric) for k in ks for metric in self.knn_metrics if k <= n_train]

    def svm_points(self):
        """``(kernel, C, param)`` tuples; ``param`` is 0 for linear."""
        pts = []
        for kernel in self.svm_kernels:
            params = {"linear": (0.0,), "poly": self.svm_orders, "rbf": self.svm_gamma}[kernel]
            pts += [(kernel, float(C), float(p)) for C in self.svm_C for p in params]
        return pts


@dataclass
class GridResult:
    best: tuple
    scores: dict  # grid point -> mean inner-CV accuracy

    def table(self):
        return sorted(self.scores.items())


def _inner_folds(y, inner_k, seed):
    try:
        plan = stratified_kfold(y, inner_k, seed)
    except StratificationError as exc:
        raise StratificationError(f"inner cross-validation: {exc}") from None
    return [plan.split(f) for f in range(inner_k)]


def grid_search(method, X, y, grid=None, inner_k=5, seed=0, threads=1):
    """Mean inner-CV accuracy for every grid point; returns a :class:`GridResult`.

    The best point maximizes the score; ties go to the lexicographically
    smallest point (k-NN points are ``(k, metric)``, SVM points
    ``(kernel, C, param)``).
    """
    grid = grid or GridSpec()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    folds = _inner_folds(y, inner_k, seed)
    n_classes = int(y.max()) + 1
    if method == "knn":
        n_inner = min(tr.size for tr, _ in folds)
        points = grid.knn_points(n_inner)
        if not points:
            raise ValueError("k-NN grid is empty for this training size")
        correct = {p: 0 for p in points}
        ks_by_metric = {}
        for k, metric in points:
            ks_by_metric.setdefault(metric, []).append(k)
        for tr, te in folds:
            for metric, ks in ks_by_metric.items():
                preds = knn_predict(X[tr], y[tr], X[te], ks, metric, n_classes)
                for k in ks:
                    correct[(k, metric)] += np.mean(preds[k] == y[te])
        scores = {p: correct[p] / len(folds) for p in points}
    elif method == "svm":
        points = grid.svm_points()

        def evaluate(point):
            kernel, C, param = point
            acc = 0.0
            for tr, te in folds:
                model = svm_train(X[tr], y[tr], kernel=kernel, C=C, param=param)
                acc += np.mean(model.predict(X[te]) == y[te])
            return acc / len(folds)

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                values = list(pool.map(evaluate, points))
        else:
            values = [evaluate(p) for p in points]
        scores = dict(zip(points, values))
    else:
        raise ValueError(f"grid search supports 'knn' and 'svm', not {method!r}")
    top = max(scores.values())
    best = min(p for p, s in scores.items() if s == top)
    return GridResult(best=best, scores=scores)
