from __future__ import annotations

import numpy as np

from .common import SparseSolution, as_matrix, support_of

GRAM_COND_LIMIT = 1e12


def omp(D, y, k, tol=1e-10):
    """Orthogonal matching pursuit.

    Adds the atom most correlated with the residual, refits all selected
    coefficients by least squares, and stops after ``k`` atoms or once
    ``||r|| <= tol * ||y||``. A numerically singular selection aborts with the
    previous iterate and ``converged=False``.
    """
    D = as_matrix(D)
    y = np.asarray(y, dtype=np.float64)
    m, n = D.shape
    if not 1 <= k <= m:
        raise ValueError(f"sparsity budget k={k} must lie in [1, {m}]")
    x = np.zeros(n)
    ynorm = float(np.linalg.norm(y))
    residual = y.copy()
    history = [ynorm]
    selected = []
    if ynorm == 0:
        return SparseSolution(x, support_of(x), 0.0, 0, True, history)
    for it in range(1, k + 1):
        corr = np.abs(D.T @ residual)
        if selected:
            corr[selected] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= tol * ynorm:
            break
        trial = selected + [j]
        Ds = D[:, trial]
        if np.linalg.cond(Ds.T @ Ds) > GRAM_COND_LIMIT:
            sol = SparseSolution(x, support_of(x), float(residual @ residual), it - 1, False, history)
            sol.message = f"selected Gram matrix is singular when adding atom {j}"
            return sol
        selected = trial
        coef, *_ = np.linalg.lstsq(Ds, y, rcond=None)
        x = np.zeros(n)
        x[selected] = coef
        residual = y - Ds @ coef
        rnorm = float(np.linalg.norm(residual))
        history.append(rnorm)
        if rnorm <= tol * ynorm:
            break
    return SparseSolution(
        x_hat=x,
        support=support_of(x),
        objective=float(residual @ residual),
        iterations=len(selected),
        converged=True,
        history=history,
    )
