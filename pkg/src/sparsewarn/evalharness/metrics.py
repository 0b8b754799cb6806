"""Confusion counts, headline rates and their normal-approximation intervals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Z_95 = 1.96


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary counts with the positive (case) class as reference."""

    tp: int = 0
    fn: int = 0
    tn: int = 0
    fp: int = 0

    def __post_init__(self):
        for name in ("tp", "fn", "tn", "fp"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v}")
            object.__setattr__(self, name, int(v))

    def __add__(self, other):
        return ConfusionMatrix(self.tp + other.tp, self.fn + other.fn,
                               self.tn + other.tn, self.fp + other.fp)

    @property
    def n_pos(self):
        return self.tp + self.fn

    @property
    def n_neg(self):
        return self.tn + self.fp

    @property
    def n_total(self):
        return self.n_pos + self.n_neg


def confusion_from_predictions(y_true, y_pred, positive=1):
    """Positive-versus-rest counts: any label other than ``positive`` is negative."""
    t = np.asarray(y_true) == positive
    p = np.asarray(y_pred) == positive
    return ConfusionMatrix(
        tp=int(np.sum(t & p)), fn=int(np.sum(t & ~p)),
        tn=int(np.sum(~t & ~p)), fp=int(np.sum(~t & p)),
    )


def confidence_interval(p, n):
    """Half-width ``1.96 sqrt(p (1 - p) / n)`` of the 95% normal interval."""
    if not 0 <= p <= 1:
        raise ValueError(f"rate must lie in [0, 1], got {p}")
    if not n >= 1:
        raise ValueError(f"count must be at least 1, got {n}")
    return Z_95 * float(np.sqrt(p * (1.0 - p) / n))


@dataclass(frozen=True)
class MetricReport:
    """Rates with half-widths. A rate whose class is absent from the test set
    is ``None`` (not zero), and so is its interval."""

    accuracy: float
    sensitivity: float
    specificity: float
    ci_accuracy: float
    ci_sensitivity: float
    ci_specificity: float
    n_total: int
    n_pos: int
    n_neg: int


def metrics(cm):
    """Accuracy over all samples, sensitivity over positives and specificity
    over negatives; each interval uses its own sample count."""
    if cm.n_total == 0:
        raise ValueError("confusion matrix is empty")

    def rate(hits, n):
        if n == 0:
            return None, None
        p = hits / n
        return p, confidence_interval(p, n)

    acc, ci_acc = rate(cm.tp + cm.tn, cm.n_total)
    sens, ci_sens = rate(cm.tp, cm.n_pos)
    spec, ci_spec = rate(cm.tn, cm.n_neg)
    return MetricReport(acc, sens, spec, ci_acc, ci_sens, ci_spec, cm.n_total, cm.n_pos, cm.n_neg)
