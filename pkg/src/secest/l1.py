"""Equality-constrained l1 minimization (basis pursuit).

``min ||e||_1  s.t.  M e = b`` is solved as the linear program over
``e = e_plus - e_minus`` with HiGHS dual simplex, which returns a vertex (and
hence sparse) minimizer.  The vertex is then polished by re-solving the
equality constraints on its support, so that recovered attacks are exact to
machine precision rather than to the LP tolerances.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import DimensionError

TOL_FEAS = 1e-8
TOL_OPT = 1e-6
MAX_ITERS = 5000


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITERS = "MaxIters"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class L1Problem:
    M: np.ndarray
    b: np.ndarray
    tol_feas: float = TOL_FEAS
    tol_opt: float = TOL_OPT
    max_iters: int = MAX_ITERS

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        r, c = M.shape
        if r < 1 or c < 1 or r >= c:
            raise DimensionError(f"need 1 <= rows < cols, got M of shape {M.shape}")
        if b.shape != (r,):
            raise DimensionError(f"b must have length {r}, got {b.shape}")
        if not (self.tol_feas > 0 and self.tol_opt > 0):
            raise DimensionError("tolerances must be strictly positive")
        if self.max_iters < 1:
            raise DimensionError("max_iters must be positive")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class L1Solution:
    e_hat: np.ndarray
    objective: float
    feas_residual: float
    iterations: int
    status: Status

    @property
    def ok(self):
        return self.status is Status.OPTIMAL


def _polish(M, b, e, eps):
    S = np.flatnonzero(np.abs(e) > eps)
    if S.size == 0 or S.size > M.shape[0]:
        return e
    sol, *_ = np.linalg.lstsq(M[:, S], b, rcond=None)
    out = np.zeros_like(e)
    out[S] = sol
    return out


def solve_l1_equality(prob):
    """Minimize ``||e||_1`` subject to ``M e = b``.

    Parameters
    ----------
    prob : L1Problem

    Returns
    -------
    L1Solution
        ``status`` is ``OPTIMAL`` only if the constraint residual is within
        ``tol_feas * (1 + ||b||_2)``.
    """
    M, b = prob.M, prob.b
    r, c = M.shape
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return L1Solution(np.zeros(c), 0.0, 0.0, 0, Status.OPTIMAL)

    # the program is positively homogeneous; solving at unit scale keeps the
    # LP tolerances meaningful for arbitrarily large attacks
    bs = b / bnorm
    res = linprog(
        np.ones(2 * c),
        A_eq=np.hstack([M, -M]),
        b_eq=bs,
        bounds=(0, None),
        method="highs-ds",
        options={
            "maxiter": int(prob.max_iters),
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
            "presolve": True,
        },
    )
    nit = int(getattr(res, "nit", 0) or 0)
    if res.status == 2 or res.x is None:
        e = np.linalg.lstsq(M, bs, rcond=None)[0] * bnorm
        resid = float(np.linalg.norm(M @ e - b))
        return L1Solution(e, float(np.abs(e).sum()), resid, nit, Status.INFEASIBLE)

    e = res.x[:c] - res.x[c:]
    polished = _polish(M, bs, e, 1e-9)
    if np.linalg.norm(M @ polished - bs) <= np.linalg.norm(M @ e - bs) and (
        np.abs(polished).sum() <= np.abs(e).sum() * (1 + 1e-9) + 1e-15
    ):
        e = polished
    e = e * bnorm
    resid = float(np.linalg.norm(M @ e - b))
    if res.status == 1:
        status = Status.MAX_ITERS
    elif resid <= prob.tol_feas * (1.0 + bnorm):
        status = Status.OPTIMAL
    else:
        status = Status.INFEASIBLE
    return L1Solution(e, float(np.abs(e).sum()), resid, nit, status)


def thresholded_support(e_hat, eps=None):
    """Indices with ``|e_i| > eps``; ``eps`` defaults to ``1e-6 * max(1, ||e||_inf)``."""
    e_hat = np.asarray(e_hat, dtype=float).reshape(-1)
    if eps is None:
        eps = 1e-6 * max(1.0, float(np.abs(e_hat).max(initial=0.0)))
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return np.flatnonzero(np.abs(e_hat) > eps)
