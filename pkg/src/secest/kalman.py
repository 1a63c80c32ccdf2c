"""Discrete-time Kalman filter on immutable state values."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import SingularInnovation

MEAS_STD = 0.01
PROCESS_VAR = 1e-6


@dataclass(frozen=True)
class KalmanState:
    """Estimate ``x_hat`` with covariance ``P`` and the noise model ``Qn``, ``Rn``."""

    x_hat: np.ndarray
    P: np.ndarray
    Qn: np.ndarray
    Rn: np.ndarray

    @classmethod
    def initial(cls, n, p, x0=None, P0=None, meas_std=MEAS_STD, process_var=PROCESS_VAR):
        x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
        P = np.eye(n) if P0 is None else np.asarray(P0, dtype=float)
        return cls(x, P, process_var * np.eye(n), meas_std**2 * np.eye(p))


def predict(ks, sys, u=None):
    """Time update ``x <- A x + B u``, ``P <- A P A^T + Qn``."""
    A = sys.A
    x = A @ ks.x_hat
    if u is not None and sys.m:
        x = x + sys.B @ np.asarray(u, dtype=float)
    P = A @ ks.P @ A.T + ks.Qn
    return replace(ks, x_hat=x, P=0.5 * (P + P.T))


def update(ks, sys, y):
    """Measurement update with the simple covariance form followed by symmetrization.

    Raises
    ------
    SingularInnovation
        If ``C P C^T + Rn`` is numerically singular.
    """
    C = sys.C
    S = C @ ks.P @ C.T + ks.Rn
    if np.linalg.cond(S) > 1e14:
        raise SingularInnovation(f"innovation covariance condition {np.linalg.cond(S):.2e}")
    K = np.linalg.solve(S, C @ ks.P).T
    x = ks.x_hat + K @ (np.asarray(y, dtype=float) - C @ ks.x_hat)
    P = (np.eye(ks.P.shape[0]) - K @ C) @ ks.P
    return replace(ks, x_hat=x, P=0.5 * (P + P.T))


def steady_state_covariance(sys, Qn, Rn):
    """Filtered (a posteriori) steady-state covariance from the DARE."""
    from scipy.linalg import solve_discrete_are

    Pp = solve_discrete_are(sys.A.T, sys.C.T, Qn, Rn)
    S = sys.C @ Pp @ sys.C.T + Rn
    return Pp - Pp @ sys.C.T @ np.linalg.solve(S, sys.C @ Pp)
