"""Proximal-gradient Lasso solvers (ISTA and FISTA)."""

from __future__ import annotations

import numpy as np

from ..errors import DivergenceError
from .common import (
    SolverParams,
    as_matrix,
    kkt_violation,
    lasso_objective,
    make_solution,
    soft_threshold,
    spectral_norm_sq,
)

# Power iteration approaches the top eigenvalue from below.
LIPSCHITZ_MARGIN = 1.0 + 1e-6


def _setup(D, y, params):
    D = as_matrix(D)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (D.shape[0],):
        raise ValueError(f"y must have shape ({D.shape[0]},), got {y.shape}")
    L = spectral_norm_sq(D) * LIPSCHITZ_MARGIN
    return D, y, L


def _done(D, y, x, grad, obj, prev, params):
    rel = abs(prev - obj) / max(abs(obj), np.finfo(float).tiny)
    return rel < params.tol and kkt_violation(D, y, x, params.lam, params.support_tol, grad) <= params.tol


def ista(D, y, params=SolverParams(), x0=None):
    """Iterative soft thresholding with step ``1/L``, ``L = ||D||_2^2``.

    The gradient of ``||Dx - y||^2`` is ``2 D^T (Dx - y)``, so one step is
    ``x <- soft(x - D^T(Dx - y) / L, lam / (2L))``. Converged means the
    relative objective change and the relative KKT violation are both below
    ``params.tol``.
    """
    D, y, L = _setup(D, y, params)
    lam = params.lam
    x = np.zeros(D.shape[1]) if x0 is None else np.array(x0, dtype=np.float64)
    if L == 0:
        return make_solution(D, y, x, lam, 0, True, [lasso_objective(D, y, x, lam)], params.support_tol)
    prev = np.inf
    history = []
    for it in range(params.max_iter + 1):
        r = D @ x - y
        obj = float(r @ r + lam * np.abs(x).sum())
        if not np.isfinite(obj):
            raise DivergenceError(f"ista diverged at iteration {it} (step 1/L, L={L:.6g})")
        history.append(obj)
        grad = 2.0 * (D.T @ r)
        if _done(D, y, x, grad, obj, prev, params):
            return make_solution(D, y, x, lam, it, True, history, params.support_tol)
        if it == params.max_iter:
            break
        prev = obj
        x = soft_threshold(x - grad / (2.0 * L), lam / (2.0 * L))
    return make_solution(D, y, x, lam, params.max_iter, False, history, params.support_tol,
                         "iteration budget exhausted")


def fista(D, y, params=SolverParams(), x0=None, restart=True):
    """Accelerated proximal gradient (Beck & Teboulle momentum).

    With ``restart`` the momentum is reset whenever the objective increases,
    which keeps the iteration monotone-ish on strongly convex pieces.
    """
    D, y, L = _setup(D, y, params)
    lam = params.lam
    x = np.zeros(D.shape[1]) if x0 is None else np.array(x0, dtype=np.float64)
    if L == 0:
        return make_solution(D, y, x, lam, 0, True, [lasso_objective(D, y, x, lam)], params.support_tol)
    z = x.copy()
    t = 1.0
    prev = np.inf
    history = []
    for it in range(params.max_iter + 1):
        r = D @ x - y
        obj = float(r @ r + lam * np.abs(x).sum())
        if not np.isfinite(obj):
            raise DivergenceError(f"fista diverged at iteration {it} (step 1/L, L={L:.6g})")
        history.append(obj)
        if _done(D, y, x, 2.0 * (D.T @ r), obj, prev, params):
            return make_solution(D, y, x, lam, it, True, history, params.support_tol)
        if it == params.max_iter:
            break
        if restart and obj > prev:
            z = x.copy()
            t = 1.0
        prev = obj
        grad_z = 2.0 * (D.T @ (D @ z - y))
        x_new = soft_threshold(z - grad_z / (2.0 * L), lam / (2.0 * L))
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
    return make_solution(D, y, x, lam, params.max_iter, False, history, params.support_tol,
                         "iteration budget exhausted")
