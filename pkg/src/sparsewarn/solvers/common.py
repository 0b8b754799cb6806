"""Shared types and helpers for the sparse solvers.

All Lasso solvers minimise ``||D x - y||_2^2 + lam * ||x||_1`` (no 1/2 factor).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..dictionary import Dictionary


@dataclass(frozen=True)
class SolverParams:
    lam: float = 0.01
    max_iter: int = 10_000
    tol: float = 1e-8
    support_tol: float | None = None  # None: 1e-6 * max|x|
    rho: float | None = None  # ADMM penalty; None picks one from D and lam

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.max_iter < 1 or not self.tol > 0:
            raise ValueError("max_iter and tol must be positive")
        if self.support_tol is not None and not self.support_tol > 0:
            raise ValueError("support_tol must be positive")
        if self.rho is not None and not self.rho > 0:
            raise ValueError("rho must be positive")

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class SparseSolution:
    x_hat: np.ndarray
    support: np.ndarray
    objective: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    message: str = ""


def as_matrix(D):
    return D.D if isinstance(D, Dictionary) else np.asarray(D, dtype=np.float64)


def soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def lasso_objective(D, y, x, lam):
    r = D @ x - y
    return float(r @ r + lam * np.abs(x).sum())


def support_of(x, support_tol=None):
    xmax = np.abs(x).max() if x.size else 0.0
    if support_tol is None:
        support_tol = 1e-6 * xmax
    if xmax == 0:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero(np.abs(x) > support_tol)


def kkt_violation(D, y, x, lam, support_tol=None, grad=None):
    """Largest optimality violation relative to ``lam``.

    On the support the stationarity residual ``|g_i + lam sign(x_i)| / lam``;
    off the support the excess ``|g_i| / lam - 1`` (clipped at 0), where
    ``g = 2 D^T (D x - y)``.
    """
    if grad is None:
        grad = 2.0 * (D.T @ (D @ x - y))
    S = support_of(x, support_tol)
    on = np.zeros(x.shape, dtype=bool)
    on[S] = True
    worst = 0.0
    if S.size:
        worst = float(np.abs(grad[on] + lam * np.sign(x[on])).max() / lam)
    if (~on).any():
        worst = max(worst, float(np.abs(grad[~on]).max() / lam - 1.0))
    return max(worst, 0.0)


def kkt_satisfied(D, y, x, lam, tol, support_tol=None):
    """The certification bounds: on-support residual <= 10 tol lam and
    off-support correlation <= lam (1 + 10 tol)."""
    D = as_matrix(D)
    grad = 2.0 * (D.T @ (D @ x - y))
    S = support_of(x, support_tol)
    on = np.zeros(x.shape, dtype=bool)
    on[S] = True
    ok_on = np.all(np.abs(grad[on] + lam * np.sign(x[on])) <= 10 * tol * lam)
    ok_off = np.all(np.abs(grad[~on]) <= lam * (1 + 10 * tol))
    return bool(ok_on and ok_off)


def spectral_norm_sq(D, iters=1000, tol=1e-12, seed=0):
    """Largest eigenvalue of ``D^T D`` by power iteration."""
    n = D.shape[1]
    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = D.T @ (D @ v)
        new = float(np.linalg.norm(w))
        if new == 0:
            return 0.0
        v = w / new
        if abs(new - est) <= tol * new:
            est = new
            break
        est = new
    return est


def make_solution(D, y, x, lam, iterations, converged, history, support_tol, message=""):
    return SparseSolution(
        x_hat=x,
        support=support_of(x, support_tol),
        objective=lasso_objective(D, y, x, lam),
        iterations=iterations,
        converged=converged,
        history=history,
        message=message,
    )
