"""k-nearest-neighbour classification under eleven distance metrics."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

METRICS = (
    "euclidean",
    "std-euclidean",
    "correlation",
    "cityblock",
    "cosine",
    "chebyshev",
    "hamming",
    "minkowski",
    "mahalanobis",
    "jaccard",
    "spearman",
)
MINKOWSKI_P = 3


class MetricWarning(UserWarning):
    pass


def _inverse_covariance(X):
    d = X.shape[1]
    cov = np.atleast_2d(np.cov(X, rowvar=False))
    eig = np.linalg.eigvalsh(cov)
    if eig[0] <= 1e-12 * max(eig[-1], np.finfo(float).tiny):
        ridge = 1e-6 * np.trace(cov) / d
        if ridge == 0:
            ridge = 1e-6
        warnings.warn(f"singular covariance for mahalanobis; adding {ridge:.3g} to the diagonal",
                      MetricWarning, stacklevel=3)
        cov = cov + ridge * np.eye(d)
    return np.linalg.inv(cov)


def pairwise_distances(train_X, query_X, metric):
    """``(n_query, n_train)`` distances. Hamming and Jaccard compare nonzero
    patterns; Spearman is the correlation distance between per-vector ranks."""
    A = np.atleast_2d(np.asarray(query_X, dtype=np.float64))
    B = np.atleast_2d(np.asarray(train_X, dtype=np.float64))
    if metric == "euclidean":
        D = cdist(A, B, "euclidean")
    elif metric == "std-euclidean":
        var = B.var(axis=0, ddof=1) if B.shape[0] > 1 else np.ones(B.shape[1])
        D = cdist(A, B, "seuclidean", V=np.where(var > 0, var, 1.0))
    elif metric == "correlation":
        D = cdist(A, B, "correlation")
    elif metric == "cityblock":
        D = cdist(A, B, "cityblock")
    elif metric == "cosine":
        D = cdist(A, B, "cosine")
    elif metric == "chebyshev":
        D = cdist(A, B, "chebyshev")
    elif metric == "hamming":
        D = cdist(A != 0, B != 0, "hamming")
    elif metric == "minkowski":
        D = cdist(A, B, "minkowski", p=MINKOWSKI_P)
    elif metric == "mahalanobis":
        D = cdist(A, B, "mahalanobis", VI=_inverse_covariance(B))
    elif metric == "jaccard":
        D = cdist(A != 0, B != 0, "jaccard")
    elif metric == "spearman":
        D = cdist(rankdata(A, axis=1), rankdata(B, axis=1), "correlation")
    else:
        raise ValueError(f"unknown metric {metric!r}")
    # Constant vectors make correlation-type distances undefined: treat as uncorrelated.
    return np.where(np.isfinite(D), D, 1.0)


def vote(neighbor_labels, n_classes):
    """Majority class per row; vote ties go to the lowest class index."""
    counts = np.zeros((neighbor_labels.shape[0], n_classes), dtype=np.int64)
    np.add.at(counts, (np.arange(neighbor_labels.shape[0])[:, None], neighbor_labels), 1)
    return np.argmax(counts, axis=1)


def knn_predict(train_X, train_y, query_X, ks, metric, n_classes=None):
    """Predictions for each ``k`` in ``ks``; returns ``{k: labels}``.

    Neighbours are ordered by distance with ties broken by training index.
    """
    train_y = np.asarray(train_y, dtype=np.int64)
    n_classes = n_classes or int(train_y.max()) + 1
    ks = [int(k) for k in np.atleast_1d(ks)]
    if min(ks) < 1 or max(ks) > train_y.size:
        raise ValueError(f"k must lie in [1, {train_y.size}]")
    D = pairwise_distances(train_X, query_X, metric)
    order = np.argsort(D, axis=1, kind="stable")[:, : max(ks)]
    labels = train_y[order]
    return {k: vote(labels[:, :k], n_classes) for k in ks}


def knn_classify(train_X, train_y, query, k, metric="euclidean", n_classes=None):
    query = np.asarray(query, dtype=np.float64)
    single = query.ndim == 1
    out = knn_predict(train_X, train_y, np.atleast_2d(query), [k], metric, n_classes)[k]
    return int(out[0]) if single else out
