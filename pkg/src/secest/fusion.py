"""Secure decoder as a pre-filter for a Kalman filter.

At every step the trailing window of ``T`` measurements is decoded and the
attack estimate for the newest sample is subtracted before the Kalman
update.  Until ``T`` samples exist the attack estimate is zero.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kalman
from .decoder import MeasurementWindow, SolverConfig, decode, propagate_state
from .lti import decoder_matrices


class Mode(str, enum.Enum):
    KF_ONLY = "KfOnly"
    SE_ONLY = "SeOnly"
    KF_PLUS_SE = "KfPlusSe"


class FusionEstimator:
    """Causal state estimator for one run.

    Parameters
    ----------
    sys : LtiSystem
        Model ``(A, B, C)`` seen by the estimator; ``B`` multiplies the known input.
    T : int
        Decoder window length.
    mode : Mode or str
    kf : KalmanState, optional
        Initial filter state; defaults to ``x_hat = 0``, ``P = I``.
    config : SolverConfig, optional
        Decoder settings (support threshold for noisy data lives here).
    """

    def __init__(self, sys, T, mode=Mode.KF_PLUS_SE, kf=None, config=None):
        self.sys = sys
        self.T = int(T)
        self.mode = Mode(mode)
        self.kf = kf if kf is not None else kalman.KalmanState.initial(sys.n, sys.p)
        self.config = config or SolverConfig()
        self.dm = decoder_matrices(sys, self.T) if self.mode is not Mode.KF_ONLY else None
        self.y_hist = deque(maxlen=self.T)
        self.u_hist = deque(maxlen=max(self.T - 1, 1))
        self.k = 0
        self.x_hat = self.kf.x_hat.copy()
        self.events = []

    def _window_attack(self):
        """Decode the trailing window; returns ``(x_hat at newest sample, e_hat newest)`` or None."""
        if len(self.y_hist) < self.T:
            return None
        U = np.array(self.u_hist)[-(self.T - 1):] if self.T > 1 else None
        if U is not None and self.sys.m == 0:
            U = None
        w = MeasurementWindow.from_rows(np.array(self.y_hist), known_inputs=U)
        res = decode(self.dm, w, self.config, sys=self.sys)
        if not res.status.value == "Optimal":
            self.events.append((self.k, res.status.value))
            return None
        x_new = propagate_state(self.sys, res.x0_hat, self.T - 1, U)
        return x_new, res.attack.per_step[-1]

    def step(self, y, u_prev=None):
        """Consume ``y(k)``; ``u_prev`` is the known input applied between ``k-1`` and ``k``.

        Returns ``(x_hat(k), e_hat(k))``.
        """
        y = np.asarray(y, dtype=float)
        if self.k > 0:
            up = np.zeros(self.sys.m) if u_prev is None else np.asarray(u_prev, dtype=float)
            self.u_hist.append(up)
        else:
            up = None
        self.y_hist.append(y)

        decoded = None if self.mode is Mode.KF_ONLY else self._window_attack()
        e_hat = np.zeros(self.sys.p) if decoded is None else decoded[1]

        if self.mode is Mode.SE_ONLY:
            if decoded is not None:
                self.x_hat = decoded[0]
            elif up is not None:
                self.x_hat = self.sys.A @ self.x_hat + (self.sys.B @ up if self.sys.m else 0.0)
        else:
            ks = self.kf
            if up is not None:
                ks = kalman.predict(ks, self.sys, up)
            ks = kalman.update(ks, self.sys, y - e_hat)
            self.kf = ks
            self.x_hat = ks.x_hat
        self.k += 1
        return self.x_hat.copy(), e_hat


@dataclass
class FusionRun:
    x_hat: np.ndarray
    e_hat: np.ndarray
    events: list = field(default_factory=list)


def run(est, measurements, inputs=None):
    """Fold :meth:`FusionEstimator.step` over ``(K, p)`` measurements.

    ``inputs[k]`` is the input applied at step ``k``; step ``k`` receives
    ``inputs[k-1]``.
    """
    Y = np.asarray(measurements, dtype=float).reshape(-1, est.sys.p)
    K = Y.shape[0]
    X = np.zeros((K, est.sys.n))
    E = np.zeros((K, est.sys.p))
    for k in range(K):
        u_prev = None if (k == 0 or inputs is None) else inputs[k - 1]
        X[k], E[k] = est.step(Y[k], u_prev)
    return FusionRun(X, E, list(est.events))


def state_rmse(truth, estimate):
    """Root mean square of the state error over all steps and components."""
    d = np.asarray(estimate) - np.asarray(truth)
    return float(np.sqrt(np.mean(d**2))) if d.size else 0.0
