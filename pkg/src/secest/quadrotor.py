"""Linear 10-state quadrotor, sensor selections and feedback designs.

State ``[p_x, v_x, th_x, dth_x, p_y, v_y, th_y, dth_y, p_z, v_z]``, input
``[th_ref_x, th_ref_y, F]``.  Feedback is ``u = G x`` so the closed loop is
``A0 + B G``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

from .decoder import correctability_report, max_correctable_errors
from .exceptions import DimensionError, MaxTriesExceeded, PlacementError, RiccatiNotConverged
from .lti import LtiSystem, controllability_rank

STATE_NAMES = ("p_x", "v_x", "th_x", "dth_x", "p_y", "v_y", "th_y", "dth_y", "p_z", "v_z")
INPUT_NAMES = ("th_ref_x", "th_ref_y", "F")
POSITIONS = (0, 4, 8)
N_STATES = 10


@dataclass(frozen=True)
class QuadrotorParams:
    tau: float = 0.2
    kappa: float = 1.0
    gravity: float = 9.81
    thrust_gain: float = 1.0
    dt: float = 0.1


@dataclass(frozen=True)
class QuadrotorModel:
    A0: np.ndarray
    B: np.ndarray
    params: QuadrotorParams

    @property
    def n(self):
        return self.A0.shape[0]

    @property
    def m(self):
        return self.B.shape[1]


@dataclass(frozen=True)
class MeasurementSelection:
    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if idx[:3] != POSITIONS:
            raise DimensionError("the first three measurements must be p_x, p_y, p_z")
        if len(set(idx)) != len(idx) or not all(0 <= i < N_STATES for i in idx):
            raise DimensionError(f"invalid state indices {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def C(self):
        return np.eye(N_STATES)[list(self.indices)]

    @property
    def p(self):
        return len(self.indices)

    @classmethod
    def random(cls, n_y, rng):
        """Positions plus ``n_y - 3`` distinct extra states drawn from ``rng``."""
        if not 3 <= n_y <= N_STATES:
            raise DimensionError(f"n_y must be in 3..{N_STATES}, got {n_y}")
        others = [i for i in range(N_STATES) if i not in POSITIONS]
        extra = rng.choice(others, size=n_y - 3, replace=False)
        return cls(POSITIONS + tuple(sorted(int(i) for i in extra)))


@dataclass(frozen=True)
class FeedbackDesign:
    G: np.ndarray
    A: np.ndarray
    kind: str
    eigenvalues: np.ndarray
    report: object = None
    requested: np.ndarray | None = None
    tries: int = 0
    extra: dict = field(default_factory=dict)

    def system(self, C, B=None):
        return LtiSystem(A=self.A, B=B, C=C)


def _discretize(Ac, Bc, dt):
    n, m = Bc.shape
    M = np.zeros((n + m, n + m))
    M[:n, :n] = Ac
    M[:n, n:] = Bc
    E = linalg.expm(M * dt)
    return E[:n, :n], E[:n, n:]


def build_quadrotor(params=None):
    """Exact zero-order-hold discretization of the per-axis linear model."""
    params = params or QuadrotorParams()
    if params.dt <= 0 or params.tau <= 0:
        raise DimensionError("sample period and time constant must be positive")
    # lateral axis: p' = v, v' = g th, th' = dth, dth' = -dth/tau + kappa/tau th_ref
    Al = np.array(
        [
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, params.gravity, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, -1.0 / params.tau],
        ]
    )
    Bl = np.array([[0.0], [0.0], [0.0], [params.kappa / params.tau]])
    Az = np.array([[0.0, 1.0], [0.0, 0.0]])
    Bz = np.array([[0.0], [params.thrust_gain]])
    Adl, Bdl = _discretize(Al, Bl, params.dt)
    Adz, Bdz = _discretize(Az, Bz, params.dt)
    A0 = linalg.block_diag(Adl, Adl, Adz)
    B = linalg.block_diag(Bdl, Bdl, Bdz)
    if controllability_rank(A0, B) != N_STATES:
        raise DimensionError("parameterization is not controllable")
    return QuadrotorModel(A0=A0, B=B, params=params)


def default_lqr_weights():
    Qc = np.eye(N_STATES)
    for i in POSITIONS:
        Qc[i, i] = 10.0
    return Qc, np.eye(3)


def solve_dare(A, B, Q, R, tol=1e-10, max_iters=100000):
    """Stabilizing DARE solution by value iteration from ``P = Q``."""
    P = np.array(Q, dtype=float)
    for it in range(max_iters):
        BtP = B.T @ P
        K = np.linalg.solve(R + BtP @ B, BtP @ A)
        Pn = Q + A.T @ P @ A - A.T @ P @ B @ K
        Pn = 0.5 * (Pn + Pn.T)
        if np.max(np.abs(Pn - P)) <= tol * max(1.0, np.max(np.abs(Pn))):
            return Pn, it + 1
        P = Pn
    raise RiccatiNotConverged(f"Riccati iteration did not converge in {max_iters} steps")


def lqr_gain(model, Qc=None, Rc=None, C=None):
    """Infinite-horizon discrete LQR; returns ``G`` with ``u = G x``."""
    if Qc is None or Rc is None:
        dQ, dR = default_lqr_weights()
        Qc = dQ if Qc is None else Qc
        Rc = dR if Rc is None else Rc
    A0, B = model.A0, model.B
    P, _ = solve_dare(A0, B, np.asarray(Qc, float), np.asarray(Rc, float))
    G = -np.linalg.solve(Rc + B.T @ P @ B, B.T @ P @ A0)
    return _design(model, G, "LQR", C)


def _design(model, G, kind, C, requested=None, tries=0):
    A = model.A0 + model.B @ G
    lam = np.linalg.eigvals(A)
    lam = lam[np.lexsort((np.imag(lam), np.real(lam)))]
    report = None
    if C is not None:
        report = correctability_report(LtiSystem(A=A, C=C))
    return FeedbackDesign(
        G=G, A=A, kind=kind, eigenvalues=lam, report=report, requested=requested, tries=tries
    )


def place_poles(model, poles, C=None, rtol=1e-6):
    """State feedback ``G`` giving ``A0 + B G`` the requested real spectrum.

    Multi-input assignment uses the Tits-Yang robust eigenstructure method,
    which also fixes the closed-loop eigenvectors.
    """
    poles = np.sort(np.asarray(poles, dtype=float))
    if poles.size != model.n:
        raise DimensionError(f"need {model.n} poles, got {poles.size}")
    if np.any(np.diff(poles) <= 0):
        raise PlacementError("requested poles must be distinct")
    with warnings.catch_warnings():
        # non-convergence of the eigenvector refinement is judged by the residual below
        warnings.simplefilter("ignore", UserWarning)
        res = signal.place_poles(model.A0, model.B, poles, method="YT", maxiter=100, rtol=1e-6)
    G = -res.gain_matrix
    design = _design(model, G, "PolePlacement", C, requested=poles)
    got = np.sort(np.real(design.eigenvalues))
    resid = float(np.max(np.abs(got - poles)) + np.max(np.abs(np.imag(design.eigenvalues))))
    if resid > rtol:
        raise PlacementError(f"placement residual {resid:.2e} exceeds {rtol:.0e}", residual=resid)
    return design


def lqr_inspired_poles(lqr_design, lo=0.05, hi=0.98, gap=1e-2):
    """Distinct positive reals near the LQR closed-loop pole moduli."""
    r = np.sort(np.clip(np.abs(lqr_design.eigenvalues), lo, hi))
    out = r.copy()
    for i in range(1, out.size):
        out[i] = max(out[i], out[i - 1] + gap)
    if out[-1] > hi:
        out -= out[-1] - hi
    return out


def default_pole_request(n=N_STATES):
    return np.linspace(0.55, 0.95, n)


def _perturb(rng, poles, eps, min_gap=1e-4):
    cand = np.sort(poles + rng.uniform(-eps, eps, size=poles.size))
    for i in range(1, cand.size):
        cand[i] = max(cand[i], cand[i - 1] + min_gap)
    return cand


def design_secure_feedback(model, C, initial_poles=None, max_tries=1000, seed=0, eps0=1e-3):
    """Perturb a pole request until every closed-loop eigenvector has full sensor support.

    Perturbations are uniform in ``[-eps, eps]`` around the initial request,
    with ``eps`` starting at ``eps0``, doubling after every 10 failures and
    capped at 0.05.

    Raises
    ------
    MaxTriesExceeded
        Carries the design with the largest ``s_min`` seen as ``.best``.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    p = C.shape[0]
    base = np.sort(np.asarray(default_pole_request(model.n) if initial_poles is None else initial_poles, float))
    if np.any(base <= 0) or np.any(np.diff(base) <= 0):
        raise PlacementError("initial poles must be distinct positive reals")
    rng = np.random.default_rng(seed)
    eps = eps0
    best = None
    poles = base
    for t in range(max_tries):
        if t:
            if t % 10 == 0:
                eps = min(2 * eps, 0.05)
            poles = _perturb(rng, base, eps)
            if poles[0] <= 0:
                continue
        try:
            d = place_poles(model, poles)
        except PlacementError:
            continue
        lam, _, s = _supports(d.A, C)
        if best is None or s.min() > best[0]:
            best = (s.min(), d, t)
        if np.all(s == p):
            return _with_report(d, C, poles, t)
    bd = None if best is None else _with_report(best[1], C, best[1].requested, best[2])
    raise MaxTriesExceeded(
        f"no design with full support after {max_tries} tries "
        f"(best s_min = {None if best is None else best[0]})",
        best=bd,
    )


def _supports(A, C):
    from .decoder import eigen_supports

    return eigen_supports(A, C)


def _with_report(d, C, requested, tries):
    from dataclasses import replace

    rep = correctability_report(_LooseSystem(d.A, C))
    return replace(d, report=rep, requested=np.asarray(requested), tries=tries)


class _LooseSystem:
    """(A, C) pair without LtiSystem's sensor validation, for diagnostic reports."""

    def __init__(self, A, C):
        self.A = np.asarray(A, float)
        self.C = np.atleast_2d(np.asarray(C, float))

    n = property(lambda self: self.A.shape[0])
    p = property(lambda self: self.C.shape[0])


__all__ = [
    "FeedbackDesign",
    "MeasurementSelection",
    "QuadrotorModel",
    "QuadrotorParams",
    "build_quadrotor",
    "default_lqr_weights",
    "default_pole_request",
    "design_secure_feedback",
    "lqr_gain",
    "lqr_inspired_poles",
    "max_correctable_errors",
    "place_poles",
    "solve_dare",
]
