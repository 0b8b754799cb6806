"""Representation-based classification: SRC (sparse code) and CRC (ridge code).

Both share the residual rule: keep only class ``i``'s coefficients,
reconstruct, and predict the class with the smallest reconstruction error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictionary import build_dictionary
from .errors import NumericalError


@dataclass(frozen=True)
class ClassDecision:
    predicted: int
    residuals: np.ndarray
    code: np.ndarray


def class_residuals(dictionary, y, x):
    """``e_i = ||y - D_i x_i||_2`` for every class. Batched when ``y`` and
    ``x`` are matrices with one query per row."""
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(y.shape[:-1] + (dictionary.n_classes,))
    for c, (a, b) in enumerate(dictionary.class_ranges):
        r = y - x[..., a:b] @ dictionary.D[:, a:b].T
        out[..., c] = np.linalg.norm(r, axis=-1)
    return out


def src_classify(dictionary, y, solver):
    """Sparse code with ``solver(D, y)``, then the per-class residual argmin.

    Ties go to the lowest class index.
    """
    try:
        sol = solver(dictionary.D, y)
    except NumericalError as exc:
        raise type(exc)(f"SRC sparse coding failed: {exc}") from exc
    e = class_residuals(dictionary, y, sol.x_hat)
    return ClassDecision(int(np.argmin(e)), e, sol.x_hat)


def crc_classify(dictionary, denoiser, y):
    x = np.asarray(y, dtype=np.float64) @ denoiser.B.T
    e = class_residuals(dictionary, y, x)
    return ClassDecision(int(np.argmin(e)), e, x)


def crc_predict(dictionary, denoiser, Y):
    """Vectorised CRC over the rows of ``Y``; returns ``(labels, residuals)``."""
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    X = Y @ denoiser.B.T
    e = class_residuals(dictionary, Y, X)
    return np.argmin(e, axis=1), e


def src_predict(dictionary, solver, Y):
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    preds = np.empty(Y.shape[0], dtype=np.int64)
    for i, y in enumerate(Y):
        preds[i] = src_classify(dictionary, y, solver).predicted
    return preds


def default_lambda_grid(lo=1e-13, hi=1e3):
    exps = np.arange(np.round(np.log10(lo)), np.round(np.log10(hi)) + 1)
    return 10.0**exps


class _RidgePath:
    """Residuals of the CRC rule for many ridge parameters from one SVD.

    With ``D = U S V^T`` the ridge code is ``V diag(s / (s^2 + lam)) U^T y``,
    so class ``i``'s reconstruction is ``(D_i V_i) diag(w) (U^T y)``.
    """

    def __init__(self, dictionary, Y):
        U, s, Vt = np.linalg.svd(dictionary.D, full_matrices=False)
        self.s = s
        self.Z = U.T @ Y.T  # r x q
        self.Y = Y
        self.P = [dictionary.D[:, a:b] @ Vt[:, a:b].T for a, b in dictionary.class_ranges]

    def predict(self, lam):
        w = self.s / (self.s**2 + lam)
        WZ = w[:, None] * self.Z
        e = np.stack([np.linalg.norm(self.Y.T - P @ WZ, axis=0) for P in self.P], axis=1)
        return np.argmin(e, axis=1)


def tune_crc_lambda(train_X, train_y, val_X, val_y, grid=None, n_classes=None):
    """Pick the ridge parameter maximising CRC validation accuracy.

    A coarse pass over ``grid`` (log-spaced, default ``1e-13 .. 1e3``) finds
    ``lam*``; a fine pass then scans ``lam* + j lam*/10`` for ``j = -5..5``
    within the grid's range. Ties resolve to the smaller lambda. Returns
    ``(lam_star, table)`` where ``table`` maps every evaluated lambda to its
    validation accuracy.
    """
    val_X = np.atleast_2d(np.asarray(val_X, dtype=np.float64))
    val_y = np.asarray(val_y)
    if val_y.size == 0:
        raise ValueError("validation split is empty")
    grid = np.sort(np.asarray(default_lambda_grid() if grid is None else grid, dtype=np.float64))
    if np.any(grid <= 0):
        raise ValueError("lambda grid must be positive")
    dictionary, _ = build_dictionary(train_X, train_y, n_classes=n_classes)
    path = _RidgePath(dictionary, val_X)
    table = {}

    def evaluate(lams):
        best_lam, best_acc = None, -1.0
        for lam in sorted(lams):
            lam = float(lam)
            if lam not in table:
                table[lam] = float(np.mean(path.predict(lam) == val_y))
            if table[lam] > best_acc:
                best_lam, best_acc = lam, table[lam]
        return best_lam

    coarse = evaluate(grid)
    fine = coarse + np.arange(-5, 6) * coarse / 10.0
    fine = fine[(fine >= grid[0]) & (fine <= grid[-1])]
    lam_star = evaluate(np.concatenate([fine, [coarse]]))
    return lam_star, table


def validation_split(labels, fraction=0.2, seed=0):
    """Stratified holdout: returns ``(train_index, val_index)``."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, val = [], []
    for c in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == c))
        n_val = int(round(fraction * members.size))
        n_val = min(max(n_val, 1), members.size - 1) if members.size > 1 else 0
        val.append(members[:n_val])
        train.append(members[n_val:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(val))

