from __future__ import annotations

import numpy as np

from ..errors import FactorizationError, NumericalError
from .common import SparseSolution, as_matrix, lasso_objective, support_of

GRAM_COND_LIMIT = 1e12


def homotopy(D, y, lam_target, max_breakpoints=None):
    """Lasso regularization path (LARS with the Lasso sign-drop rule).

    Starts at ``lam0 = ||2 D^T y||_inf`` with ``x = 0`` and follows the
    piecewise-linear solution path down to ``lam_target``. Along each segment
    the active coefficients satisfy ``2 D_A^T (y - D_A x_A) = lam * s_A``.
    ``history`` holds the breakpoints (values of lam where the active set
    changed).
    """
    D = as_matrix(D)
    y = np.asarray(y, dtype=np.float64)
    if not lam_target > 0:
        raise ValueError(f"lam_target must be positive, got {lam_target}")
    m, n = D.shape
    if max_breakpoints is None:
        max_breakpoints = 20 * max(m, n)
    x = np.zeros(n)
    c = 2.0 * (D.T @ y)
    lam = float(np.abs(c).max()) if n else 0.0
    if lam <= lam_target:
        return SparseSolution(x, support_of(x), lasso_objective(D, y, x, lam_target), 0, True, [lam] if lam > 0 else [])
    active = [int(np.argmax(np.abs(c)))]
    signs = [float(np.sign(c[active[0]]))]
    history = [lam]
    just_dropped = None
    for step in range(1, max_breakpoints + 1):
        Da = D[:, active]
        G = Da.T @ Da
        if np.linalg.cond(G) > GRAM_COND_LIMIT:
            raise FactorizationError(
                f"active-set Gram matrix singular at lam={lam:.6g} with {len(active)} atoms"
            )
        s = np.array(signs)
        d = np.linalg.solve(G, s)
        a = D.T @ (Da @ d)

        best = lam - lam_target
        event = ("target", None)
        inactive = np.ones(n, dtype=bool)
        inactive[active] = False
        if just_dropped is not None:
            inactive[just_dropped] = False
        idx = np.flatnonzero(inactive)
        if idx.size:
            cj, aj = c[idx], a[idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = np.concatenate([(lam - cj) / (1.0 - aj), (lam + cj) / (1.0 + aj)])
            cand[~np.isfinite(cand) | (cand <= 1e-14 * lam)] = np.inf
            k = int(np.argmin(cand))
            if cand[k] < best:
                best = float(cand[k])
                event = ("join", int(idx[k % idx.size]))
        xa = x[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = -2.0 * xa / d
        cross[~np.isfinite(cross) | (cross <= 1e-14 * lam)] = np.inf
        k = int(np.argmin(cross)) if cross.size else 0
        if cross.size and cross[k] < best:
            best = float(cross[k])
            event = ("drop", k)

        x[active] = xa + 0.5 * best * d
        lam -= best
        c = 2.0 * (D.T @ (y - D @ x))
        just_dropped = None
        kind, which = event
        if kind == "target":
            lam = lam_target
            # Re-solve the active block exactly to shed accumulated drift.
            Da = D[:, active]
            x[active] = np.linalg.solve(Da.T @ Da, Da.T @ y - 0.5 * lam * np.array(signs))
            return SparseSolution(
                x_hat=x,
                support=support_of(x),
                objective=lasso_objective(D, y, x, lam),
                iterations=step,
                converged=True,
                history=history,
            )
        history.append(lam)
        if kind == "join":
            active.append(which)
            signs.append(float(np.sign(c[which])))
        else:
            dropped = active.pop(which)
            signs.pop(which)
            x[dropped] = 0.0
            just_dropped = dropped
            if not active:
                c = 2.0 * (D.T @ y)
                j = int(np.argmax(np.abs(c)))
                active, signs = [j], [float(np.sign(c[j]))]
    raise NumericalError(f"homotopy exceeded {max_breakpoints} breakpoints before reaching lam={lam_target}")
