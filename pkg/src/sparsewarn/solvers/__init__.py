"""Sparse recovery: OMP, ISTA/FISTA, ADMM and the Lasso homotopy path."""

from .admm import admm_lasso
from .common import (
    SolverParams,
    SparseSolution,
    kkt_satisfied,
    kkt_violation,
    lasso_objective,
    soft_threshold,
    support_of,
)
from .greedy import omp
from .homotopy import homotopy
from .proximal import fista, ista

__all__ = [
    "SOLVER_NAMES",
    "SolverParams",
    "SparseSolution",
    "admm_lasso",
    "fista",
    "get_solver",
    "homotopy",
    "ista",
    "kkt_satisfied",
    "kkt_violation",
    "lasso_objective",
    "omp",
    "soft_threshold",
    "support_of",
]


SOLVER_NAMES = ("omp", "ista", "fista", "admm", "homotopy")


def get_solver(name, params=None, sparsity=None):
    """Bind a solver to its parameters: returns ``f(D, y) -> SparseSolution``."""
    params = params if params is not None else SolverParams()
    if name == "omp":
        def run(D, y):
            k = sparsity if sparsity is not None else max(1, min(D.shape[0], D.shape[1]) // 4)
            return omp(D, y, k)
    elif name == "ista":
        def run(D, y):
            return ista(D, y, params)
    elif name == "fista":
        def run(D, y):
            return fista(D, y, params)
    elif name == "admm":
        def run(D, y):
            return admm_lasso(D, y, params)
    elif name == "homotopy":
        def run(D, y):
            return homotopy(D, y, params.lam)
    else:
        raise ValueError(f"unknown solver {name!r}; expected one of {SOLVER_NAMES}")
    run.__name__ = name
    return run
