"""Gaussian-mixture feature sets standing in for extracted image features."""

from __future__ import annotations

import numpy as np

from .datastore import FeatureDataset


def synth_dataset(per_class, d, sep, sigma=1.0, seed=0, n_classes=None, components=2):
    """Classes drawn from isotropic Gaussian mixtures.

    Each class mixes ``components`` equally likely Gaussians. All component
    means form a regular simplex, scaled so the class means (the averages of
    their components) lie at pairwise distance ``sep * sigma``. Noise has
    covariance ``(sigma^2 / d) I``, i.e. ``sigma`` is the RMS noise length.

    With one component per class and training-mean centering the two class
    means of a binary problem point in opposite directions, which
    sign-agnostic codes (ridge, lasso) cannot separate; two or more
    components avoid that degenerate geometry. ``sep = 0`` makes all classes
    identical.

    ``per_class`` is one count for every class or a sequence of counts.
    """
    counts = np.atleast_1d(np.asarray(per_class, dtype=np.int64))
    if n_classes is not None:
        if counts.size == 1:
            counts = np.repeat(counts, n_classes)
        elif counts.size != n_classes:
            raise ValueError(f"{counts.size} class counts given for {n_classes} classes")
    C = counts.size
    K = int(components)
    if C < 2:
        raise ValueError("need at least two classes")
    if K < 1:
        raise ValueError("need at least one component per class")
    if np.any(counts < 1):
        raise ValueError("every class needs at least one sample")
    if d < C * K:
        raise ValueError(f"dimension {d} cannot hold {C * K} orthogonal component means")
    if sep < 0 or not sigma > 0:
        raise ValueError("sep must be non-negative and sigma positive")
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((d, C * K)))
    # Orthonormal vertices scaled by e/sqrt(2) are pairwise e apart; class
    # means of K such vertices are then e/sqrt(K) apart.
    edge = sep * sigma * np.sqrt(K)
    means = (edge / np.sqrt(2.0)) * Q.T
    labels = np.repeat(np.arange(C), counts)
    comp = labels * K + rng.integers(0, K, size=labels.size)
    samples = means[comp] + rng.standard_normal((labels.size, d)) * (sigma / np.sqrt(d))
    return FeatureDataset(samples, labels, tuple(f"class{c}" for c in range(C)))
