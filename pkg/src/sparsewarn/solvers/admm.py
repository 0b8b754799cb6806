from __future__ import annotations

import numpy as np
from scipy import linalg

from ..errors import FactorizationError
from .common import SolverParams, as_matrix, kkt_violation, make_solution, soft_threshold


class _XUpdate:
    """Solves ``(2 D^T D + rho I) x = q`` with a cached Cholesky factor.

    For wide ``D`` the matrix inversion lemma reduces this to an ``m x m``
    factorization of ``rho/2 I + D D^T``.
    """

    def __init__(self, D, rho):
        self.D = D
        self.rho = rho
        m, n = D.shape
        self.wide = n > m
        if self.wide:
            M = D @ D.T
            M[np.diag_indices(m)] += rho / 2.0
        else:
            M = 2.0 * (D.T @ D)
            M[np.diag_indices(n)] += rho
        try:
            self.factor = linalg.cho_factor(M)
        except (linalg.LinAlgError, ValueError) as exc:
            raise FactorizationError(f"ADMM factorization failed (rho={rho}): {exc}") from None

    def __call__(self, q):
        if self.wide:
            return (q - self.D.T @ linalg.cho_solve(self.factor, self.D @ q)) / self.rho
        return linalg.cho_solve(self.factor, q)


def admm_lasso(D, y, params=SolverParams(), adapt_rho=True):
    """Lasso by ADMM on the split ``x = z``.

    ``x`` carries the quadratic term, ``z`` the l1 term and ``u`` the scaled
    dual. With ``adapt_rho`` the penalty is rebalanced (factor 2 when the
    primal and dual residuals differ by more than 10x) during the first
    iterations, refactoring only when it changes. The returned code is ``z``.
    """
    D = as_matrix(D)
    y = np.asarray(y, dtype=np.float64)
    m, n = D.shape
    lam = params.lam
    rho = params.rho if params.rho is not None else max(lam, 1e-3 * float(np.linalg.norm(D, 2)) ** 2)
    solve = _XUpdate(D, rho)
    Dty2 = 2.0 * (D.T @ y)
    x = np.zeros(n)
    z = np.zeros(n)
    u = np.zeros(n)
    history = []
    sqrt_n = np.sqrt(n)
    for it in range(1, params.max_iter + 1):
        x = solve(Dty2 + rho * (z - u))
        z_old = z
        z = soft_threshold(x + u, lam / rho)
        u = u + x - z
        r_norm = float(np.linalg.norm(x - z))
        s_norm = float(rho * np.linalg.norm(z - z_old))
        resid = D @ z - y
        history.append(float(resid @ resid + lam * np.abs(z).sum()))
        eps_pri = params.tol * (sqrt_n + max(np.linalg.norm(x), np.linalg.norm(z)))
        eps_dual = params.tol * (sqrt_n + rho * np.linalg.norm(u))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            if kkt_violation(D, y, z, lam, params.support_tol) <= params.tol:
                return make_solution(D, y, z, lam, it, True, history, params.support_tol)
        if adapt_rho and it <= 200:
            scale = 1.0
            if r_norm > 10.0 * s_norm:
                scale = 2.0
            elif s_norm > 10.0 * r_norm:
                scale = 0.5
            if scale != 1.0:
                rho *= scale
                u /= scale
                solve = _XUpdate(D, rho)
    return make_solution(D, y, z, lam, params.max_iter, False, history, params.support_tol,
                         "iteration budget exhausted")
