"""Binary soft-margin SVM trained by sequential minimal optimization.

The working pair is the maximal KKT-violating pair (first-order selection);
each step solves the two-variable subproblem analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KERNELS = ("linear", "poly", "rbf")
FULL_KERNEL_LIMIT = 4000
TAU = 1e-12


def kernel_matrix(A, B, kernel, param):
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    if kernel == "linear":
        return A @ B.T
    if kernel == "poly":
        return (1.0 + (A @ B.T) / A.shape[1]) ** int(param)
    if kernel == "rbf":
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
        return np.exp(-float(param) * np.maximum(sq, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


@dataclass
class SvmModel:
    support_X: np.ndarray
    support_y: np.ndarray  # +-1
    alpha: np.ndarray
    b: float
    kernel: str
    param: float
    C: float
    converged: bool
    iterations: int
    kkt_gap: float

    def decision_function(self, X):
        if self.alpha.size == 0:
            return np.full(np.atleast_2d(X).shape[0], self.b)
        K = kernel_matrix(X, self.support_X, self.kernel, self.param)
        return K @ (self.alpha * self.support_y) + self.b

    def predict(self, X):
        """Class 1 where the decision value is positive, else class 0."""
        return (self.decision_function(X) > 0).astype(np.int64)


class _Columns:
    def __init__(self, X, y, kernel, param):
        self.X, self.y, self.kernel, self.param = X, y, kernel, param
        n = X.shape[0]
        self.full = None
        if n <= FULL_KERNEL_LIMIT:
            self.full = (y[:, None] * y[None, :]) * kernel_matrix(X, X, kernel, param)
            self.diag = np.diag(self.full).copy()
        else:
            self.cache = {}
            self.diag = np.array([kernel_matrix(X[i], X[i], kernel, param)[0, 0] for i in range(n)])

    def __call__(self, i):
        if self.full is not None:
            return self.full[i]
        col = self.cache.get(i)
        if col is None:
            if len(self.cache) > 256:
                self.cache.clear()
            col = self.y[i] * self.y * kernel_matrix(self.X, self.X[i], self.kernel, self.param)[:, 0]
            self.cache[i] = col
        return col


def svm_train(X, labels, kernel="rbf", C=1.0, param=1.0, tol=1e-3, max_iter=100_000):
    """Fit the dual problem ``min 1/2 a^T Q a - sum(a)`` s.t. ``0 <= a <= C``,
    ``y^T a = 0`` with ``Q_ij = y_i y_j K(x_i, x_j)``.

    ``labels`` are 0/1 (mapped to -1/+1). ``param`` is the polynomial order or
    the RBF rate ``gamma`` in ``exp(-gamma ||x - x'||^2)``. Training stops
    when the maximal KKT violation drops below ``tol``; hitting ``max_iter``
    returns the current duals with ``converged=False``.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    if set(np.unique(labels)) - {0, 1}:
        raise ValueError("svm_train expects binary 0/1 labels")
    y = np.where(labels == 1, 1.0, -1.0)
    n = y.size
    Q = _Columns(X, y, kernel, param)
    alpha = np.zeros(n)
    G = -np.ones(n)
    converged = False
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * G
        if not up.any() or not low.any():
            converged, gap = True, 0.0
            break
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = float(score[i] - score[j])
        if gap < tol:
            converged = True
            break
        Qi, Qj = Q(i), Q(j)
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(Q.diag[i] + Q.diag[j] + 2.0 * Qi[j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            elif alpha[j] > C:
                alpha[j], alpha[i] = C, C + diff
        else:
            quad = max(Q.diag[i] + Q.diag[j] - 2.0 * Qi[j], TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
            elif alpha[j] < 0:
                alpha[j], alpha[i] = 0.0, total
            if total > C:
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, total
        G += Qi * (alpha[i] - ai) + Qj * (alpha[j] - aj)

    score = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b = float(score[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        hi = score[up].max() if up.any() else score[low].min()
        lo = score[low].min() if low.any() else score[up].max()
        b = float(0.5 * (hi + lo))
    sv = alpha > 0
    return SvmModel(
        support_X=X[sv], support_y=y[sv], alpha=alpha[sv], b=b, kernel=kernel,
        param=float(param), C=float(C), converged=converged, iterations=it, kkt_gap=gap,
    )
