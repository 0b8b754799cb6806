"""PCA compression and the two normalization schemes.

The representation-based classifiers (SRC, CRC, CSEN) consume centered
unit-norm vectors; the MLP/SVM/k-NN baselines consume per-feature z-scores.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .datastore import FeatureDataset
from .errors import FitError


class NormalizationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Projector:
    """Rows of ``A`` are orthonormal principal directions; ``mean`` is the
    training mean subtracted before projecting."""

    A: np.ndarray
    mean: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def d(self):
        return self.A.shape[1]

    @property
    def compression_ratio(self):
        return self.m / self.d


def fit_pca(train, m):
    """Top-``m`` principal directions of the centered training matrix.

    Computed from the thin SVD of the centered data. Each direction's sign is
    fixed so that its largest-magnitude entry is positive.
    """
    X = train.samples if isinstance(train, FeatureDataset) else np.asarray(train, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise FitError("PCA needs at least two samples")
    if not 1 <= m <= min(n - 1, d):
        raise FitError(f"m={m} must lie in [1, min(N-1, d)] = [1, {min(n - 1, d)}]")
    mean = X.mean(axis=0)
    Xc = X - mean
    _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    variance = s**2 / (n - 1)
    total = variance.sum()
    if not total > 0:
        raise FitError("training data has zero variance in every direction")
    A = Vt[:m].copy()
    pivot = np.argmax(np.abs(A), axis=1)
    signs = np.sign(A[np.arange(m), pivot])
    A *= signs[:, None]
    return Projector(
        A=A,
        mean=mean,
        explained_variance=variance[:m],
        explained_variance_ratio=variance[:m] / total,
    )


def project(p, s):
    """``A (s - mean)`` for one vector or for each row of a matrix."""
    s = np.asarray(s, dtype=np.float64)
    if s.shape[-1] != p.d:
        raise ValueError(f"expected dimension {p.d}, got {s.shape[-1]}")
    return (s - p.mean) @ p.A.T


def project_dataset(p, ds):
    return ds.with_samples(project(p, ds.samples))


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray
    scale: np.ndarray
    mode: str
    warnings: tuple = ()


def normalize(X, mode, stats=None):
    """Normalize rows of ``X``; returns ``(X_normalized, stats)``.

    ``zscore`` maps each feature to ``(x - mean) / scale``. ``unitnorm``
    subtracts the mean and rescales each row to unit l2 norm. When ``stats`` is
    None the statistics are fitted on ``X``; otherwise they are applied as is.
    Zero-variance features get scale 1 and zero rows stay zero; both cases
    emit a :class:`NormalizationWarning` and are recorded on the stats.
    """
    X = np.asarray(X, dtype=np.float64)
    if mode not in ("zscore", "unitnorm"):
        raise ValueError(f"unknown normalization mode {mode!r}")
    notes = []
    if stats is None:
        mean = X.mean(axis=0)
        if mode == "zscore":
            scale = X.std(axis=0)
            flat = scale == 0
            if flat.any():
                msg = f"{int(flat.sum())} zero-variance feature(s); scale set to 1"
                warnings.warn(msg, NormalizationWarning, stacklevel=2)
                notes.append(msg)
                scale = np.where(flat, 1.0, scale)
        else:
            scale = np.ones_like(mean)
        stats = NormStats(mean=mean, scale=scale, mode=mode)
    elif stats.mode != mode:
        raise ValueError(f"stats were fitted for {stats.mode!r}, not {mode!r}")

    if mode == "zscore":
        out = (X - stats.mean) / stats.scale
    else:
        out = X - stats.mean
        norms = np.linalg.norm(out, axis=-1, keepdims=True)
        zero = norms == 0
        if zero.any():
            msg = f"{int(zero.sum())} zero vector(s) left unnormalized"
            warnings.warn(msg, NormalizationWarning, stacklevel=2)
            notes.append(msg)
        out = out / np.where(zero, 1.0, norms)
    if notes:
        stats = NormStats(stats.mean, stats.scale, stats.mode, stats.warnings + tuple(notes))
    return out, stats
