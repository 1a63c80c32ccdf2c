"""Discrete-time LTI plants, trajectories and the stacked observability map."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg

from .exceptions import DimensionError, UnobservableSystem

RANK_RTOL = 1e-9


def _as_matrix(M, name):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionError(f"{name} contains non-finite entries")
    M.setflags(write=False)
    return M


@dataclass(frozen=True)
class LtiSystem:
    """x(k+1) = A x(k) + B u(k),  y(k) = C x(k).

    ``A`` is the per-step dynamics as seen by the estimator; for a plant under
    secure state feedback it is the closed-loop matrix ``A0 + B G``.
    ``B`` defaults to an ``n x 0`` matrix (autonomous system).
    """

    A: np.ndarray
    C: np.ndarray
    B: np.ndarray = None

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        C = _as_matrix(self.C, "C")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if C.shape[1] != n:
            raise DimensionError(f"C must have {n} columns, got {C.shape}")
        if self.B is None:
            B = np.zeros((n, 0))
            B.setflags(write=False)
        else:
            B = _as_matrix(self.B, "B")
            if B.shape[0] != n:
                raise DimensionError(f"B must have {n} rows, got {B.shape}")
        if np.any(np.all(C == 0, axis=1)):
            raise DimensionError("C has an identically zero row")
        if np.linalg.matrix_rank(C) < C.shape[0]:
            raise DimensionError("C must have full row rank")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class Trajectory:
    """States x(0..K), inputs u(0..K-1) and measurements y(0..K-1), one row per step."""

    states: np.ndarray
    inputs: np.ndarray
    measurements: np.ndarray

    def __post_init__(self):
        K = self.inputs.shape[0]
        if self.states.shape[0] != K + 1 or self.measurements.shape[0] != K:
            raise DimensionError(
                "trajectory lengths inconsistent: "
                f"{self.states.shape[0]} states, {K} inputs, "
                f"{self.measurements.shape[0]} measurements"
            )

    def __len__(self):
        return self.inputs.shape[0]


@dataclass(frozen=True)
class DecoderMatrices:
    """Full QR split of the observability stack, ``Phi = Q1 @ R1`` and ``Q2.T @ Phi = 0``."""

    Phi: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    R1: np.ndarray
    T: int
    p: int = field(default=0)

    @property
    def n(self):
        return self.Phi.shape[1]


def build_observability(sys, T):
    """Stack ``[C; CA; ...; CA^(T-1)]`` into a ``(p*T, n)`` matrix."""
    if int(T) != T or T < 1:
        raise DimensionError(f"window length must be a positive integer, got {T!r}")
    blocks = [sys.C]
    for _ in range(1, int(T)):
        blocks.append(blocks[-1] @ sys.A)
    return np.vstack(blocks)


def factorize(Phi, T=None, p=None):
    """Full QR factorization of ``Phi`` into the decoder kernel.

    Raises
    ------
    UnobservableSystem
        If ``Phi`` does not have full column rank.
    """
    Phi = np.asarray(Phi, dtype=float)
    rows, n = Phi.shape
    if rows <= n:
        raise UnobservableSystem(
            f"stack has {rows} rows for {n} states; no residual subspace remains"
        )
    Q, R = linalg.qr(Phi, mode="full")
    d = np.abs(np.diag(R[:n, :n]))
    scale = max(np.abs(R).max(), np.finfo(float).tiny)
    if d.min() <= RANK_RTOL * scale:
        raise UnobservableSystem(
            f"rank(Phi) < {n}: smallest |R1_ii| = {d.min():.3e}"
        )
    if T is None:
        T = 1 if p is None else rows // p
    if p is None:
        p = rows // T
    return DecoderMatrices(
        Phi=Phi, Q1=Q[:, :n], Q2=Q[:, n:], R1=R[:n, :n], T=int(T), p=int(p)
    )


def decoder_matrices(sys, T):
    """``factorize(build_observability(sys, T))`` with window metadata attached."""
    return factorize(build_observability(sys, T), T=T, p=sys.p)


def simulate_closed_loop(sys, x0, K):
    """Autonomous run ``x(k) = A^k x0``; measurements are clean ``C x(k)``."""
    if K < 1:
        raise DimensionError("K must be at least 1")
    return simulate_open_loop(sys, x0, np.zeros((int(K), sys.m)))


def simulate_open_loop(sys, x0, inputs):
    """Forced recursion ``x(k+1) = A x(k) + B u(k)`` over the given input rows."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (sys.n,):
        raise DimensionError(f"x0 must have length {sys.n}")
    U = np.asarray(inputs, dtype=float)
    if U.ndim == 1:
        U = U.reshape(-1, 1) if sys.m == 1 else U.reshape(-1, sys.m)
    if U.ndim != 2 or U.shape[1] != sys.m:
        raise DimensionError(f"inputs must have {sys.m} columns, got shape {U.shape}")
    K = U.shape[0]
    X = np.empty((K + 1, sys.n))
    X[0] = x0
    for k in range(K):
        X[k + 1] = sys.A @ X[k] + sys.B @ U[k]
    return Trajectory(states=X, inputs=U, measurements=X[:-1] @ sys.C.T)


def forced_response(sys, inputs, T):
    """Output contribution ``sum_{j<k} C A^(k-1-j) B u(j)`` of known inputs, k = 0..T-1.

    Returns a ``(T, p)`` array; row 0 is always zero.
    """
    out = np.zeros((T, sys.p))
    if inputs is None or sys.m == 0:
        return out
    U = np.asarray(inputs, dtype=float).reshape(-1, sys.m)
    if U.shape[0] != T - 1:
        raise DimensionError(f"expected {T - 1} known inputs, got {U.shape[0]}")
    z = np.zeros(sys.n)
    for k in range(1, T):
        z = sys.A @ z + sys.B @ U[k - 1]
        out[k] = sys.C @ z
    return out


def observability_rank(A, C):
    """Rank of the standard n-step observability matrix."""
    n = A.shape[0]
    blocks = [np.atleast_2d(C)]
    for _ in range(1, n):
        blocks.append(blocks[-1] @ A)
    return np.linalg.matrix_rank(np.vstack(blocks))


def controllability_rank(A, B):
    n = A.shape[0]
    blocks = [np.atleast_2d(B)]
    for _ in range(1, n):
        blocks.append(A @ blocks[-1])
    return np.linalg.matrix_rank(np.hstack(blocks))


def load_system(path):
    """Read ``{"A": [[...]], "B": [[...]], "C": [[...]]}`` from a JSON file.

    ``B`` is optional.
    """
    path = Path(path)
    with path.open() as f:
        data = json.load(f)
    missing = {"A", "C"} - set(data)
    if missing:
        raise DimensionError(f"{path}: missing keys {sorted(missing)}")
    return LtiSystem(A=data["A"], B=data.get("B"), C=data["C"])


def save_system(sys, path):
    data = {"A": sys.A.tolist(), "C": sys.C.tolist()}
    if sys.m:
        data["B"] = sys.B.tolist()
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
