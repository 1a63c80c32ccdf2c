"""Secure state decoder and its correctability analysis.

The decoder projects a window of stacked measurements onto the orthogonal
complement of the observability stack, where only the attack survives,
recovers the sparse attack by l1 minimization and then solves for the initial
state of the window.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, NotCorrectable
from .l1 import L1Problem, Status, solve_l1_equality, thresholded_support
from .l1 import MAX_ITERS, TOL_FEAS, TOL_OPT
from .lti import build_observability, decoder_matrices, forced_response

SUPPORT_RTOL = 1e-8


@dataclass(frozen=True)
class MeasurementWindow:
    """Stacked measurements ``Y = [y(0); ...; y(T-1)]`` and optional known inputs ``u(0..T-2)``."""

    Y: np.ndarray
    T: int
    p: int
    known_inputs: np.ndarray | None = None

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=float).reshape(-1)
        if Y.size != self.T * self.p:
            raise DimensionError(f"Y has {Y.size} entries, expected {self.T}*{self.p}")
        object.__setattr__(self, "Y", Y)
        if self.known_inputs is not None:
            U = np.atleast_2d(np.asarray(self.known_inputs, dtype=float))
            if self.T == 1:
                U = U.reshape(0, U.shape[-1] if U.size else 0)
            if U.shape[0] != self.T - 1:
                raise DimensionError(
                    f"expected {self.T - 1} known inputs, got {U.shape[0]}"
                )
            object.__setattr__(self, "known_inputs", U)

    @classmethod
    def from_rows(cls, measurements, known_inputs=None):
        """Build a window from a ``(T, p)`` array of per-step measurements."""
        Ym = np.atleast_2d(np.asarray(measurements, dtype=float))
        T, p = Ym.shape
        return cls(Y=Ym.reshape(-1), T=T, p=p, known_inputs=known_inputs)


@dataclass(frozen=True)
class AttackEstimate:
    E_hat: np.ndarray
    per_step: np.ndarray
    support: tuple

    @classmethod
    def from_stacked(cls, E_hat, p, eps=None):
        E_hat = np.asarray(E_hat, dtype=float).reshape(-1)
        per_step = E_hat.reshape(-1, p)
        flat = thresholded_support(E_hat, eps)
        support = tuple(
            np.array([i - k * p for i in flat if k * p <= i < (k + 1) * p], dtype=int)
            for k in range(per_step.shape[0])
        )
        return cls(E_hat=E_hat, per_step=per_step, support=support)


@dataclass(frozen=True)
class SolverConfig:
    tol_feas: float = TOL_FEAS
    tol_opt: float = TOL_OPT
    max_iters: int = MAX_ITERS
    refine: bool = True
    support_eps: float | None = None


@dataclass(frozen=True)
class DecodeResult:
    x0_hat: np.ndarray
    attack: AttackEstimate
    status: Status
    refined: bool = False


def _clean_stack(dm, w, sys):
    Y = w.Y
    if Y.size != dm.Phi.shape[0]:
        raise DimensionError(
            f"window has {Y.size} entries but the decoder expects {dm.Phi.shape[0]}"
        )
    if w.known_inputs is not None and w.known_inputs.size:
        if sys is None:
            raise DimensionError("known inputs supplied without the system model")
        Y = Y - forced_response(sys, w.known_inputs, w.T).reshape(-1)
    return Y


def residual_projection(dm, w, sys=None):
    """Attack-only residual ``Q2^T (Y - forced response)``."""
    return dm.Q2.T @ _clean_stack(dm, w, sys)


def state_from_attack(dm, Y, E_hat):
    """Initial state ``R1^{-1} Q1^T (Y - E_hat)`` for a known attack estimate."""
    from scipy.linalg import solve_triangular

    return solve_triangular(dm.R1, dm.Q1.T @ (np.asarray(Y) - np.asarray(E_hat)))


def decode(dm, w, config=None, sys=None):
    """Recover the window's initial state and the stacked attack.

    Parameters
    ----------
    dm : DecoderMatrices
    w : MeasurementWindow
    config : SolverConfig, optional
    sys : LtiSystem, optional
        Needed only when ``w`` carries known inputs, whose forced response is
        removed before projection.

    Returns
    -------
    DecodeResult

    Notes
    -----
    With ``config.refine`` the l1 estimate is used only to locate the attacked
    entries; the state is then fitted by least squares on the remaining rows
    of the window and the attack is read back as the residual on the attacked
    rows.  When the l1 estimate is exact this coincides with the plain
    ``R1^{-1} Q1^T (Y - E)`` reconstruction, but it stays accurate for attacks
    many orders of magnitude larger than the state.
    """
    config = config or SolverConfig()
    Y = _clean_stack(dm, w, sys)
    Ytil = dm.Q2.T @ Y
    sol = solve_l1_equality(
        L1Problem(
            M=dm.Q2.T,
            b=Ytil,
            tol_feas=config.tol_feas,
            tol_opt=config.tol_opt,
            max_iters=config.max_iters,
        )
    )
    E = sol.e_hat
    x0 = None
    refined = False
    if config.refine:
        S = thresholded_support(E, config.support_eps)
        good = np.ones(E.size, dtype=bool)
        good[S] = False
        Pg = dm.Phi[good]
        if Pg.shape[0] >= dm.n and np.linalg.matrix_rank(Pg) == dm.n:
            x0 = np.linalg.lstsq(Pg, Y[good], rcond=None)[0]
            E = np.where(good, 0.0, Y - dm.Phi @ x0)
            refined = True
    if x0 is None:
        x0 = state_from_attack(dm, Y, E)
    attack = AttackEstimate.from_stacked(E, w.p, config.support_eps)
    return DecodeResult(x0_hat=x0, attack=attack, status=sol.status, refined=refined)


def propagate_state(sys, x0_hat, k, known_inputs=None):
    """Advance a decoded window-initial state by ``k`` steps with the known inputs."""
    x = np.asarray(x0_hat, dtype=float).copy()
    U = None if known_inputs is None else np.asarray(known_inputs, dtype=float).reshape(-1, sys.m)
    if k < 0 or (U is not None and U.shape[0] < k):
        raise DimensionError(f"offset {k} is outside the window")
    for j in range(k):
        x = sys.A @ x
        if U is not None and sys.m:
            x = x + sys.B @ U[j]
    return x


# correctability analysis


@dataclass(frozen=True)
class CorrectabilityReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    supports: np.ndarray
    p: int
    n: int
    q: int | None = None
    T_star: int | None = None
    conditions: dict = field(default_factory=dict)

    @property
    def s_min(self):
        return int(self.supports.min())

    @property
    def q_max(self):
        return (self.s_min - 1) // 2

    @property
    def certified(self):
        """Whether every hypothesis behind the eigenvector support test holds."""
        return all(self.conditions.values())

    def to_dict(self):
        ev = self.eigenvalues
        return {
            "eigenvalues_real": np.real(ev).tolist(),
            "eigenvalues_imag": np.imag(ev).tolist(),
            "supports": [int(s) for s in self.supports],
            "p": self.p,
            "n": self.n,
            "s_min": self.s_min,
            "q_max": self.q_max,
            "max_correctable_bound": max_correctable_errors(self.p),
            "q": self.q,
            "T_star": self.T_star,
            "conditions": {k: bool(v) for k, v in self.conditions.items()},
            "certified": bool(self.certified),
        }


def max_correctable_errors(p):
    """Upper bound ``ceil(p/2 - 1)`` on correctable errors with ``p`` sensors."""
    return math.ceil(p / 2 - 1)


def eigen_supports(A, C, eps=SUPPORT_RTOL):
    """Eigenpairs of ``A`` (unit-norm vectors) and ``|supp(C v_i)|`` under relative threshold ``eps``."""
    lam, V = np.linalg.eig(np.asarray(A, dtype=float))
    order = np.lexsort((np.imag(lam), np.real(lam)))
    lam, V = lam[order], V[:, order]
    V = V / np.linalg.norm(V, axis=0)
    CV = np.abs(np.asarray(C) @ V)
    scale = CV.max(axis=0)
    s = np.array(
        [int(np.sum(CV[:, i] > eps * scale[i])) if scale[i] > 0 else 0 for i in range(lam.size)]
    )
    return lam, V, s


def correctability_report(sys, eps=SUPPORT_RTOL, q=None):
    """Eigenvector support analysis of ``(A, C)``.

    ``q_max = floor((s_min - 1) / 2)`` is only a certificate when every entry
    of ``conditions`` holds; otherwise it is advisory.  If ``q`` is given and
    certifiable, the minimum window length for it is attached as ``T_star``.
    """
    A, C = sys.A, sys.C
    n, p = sys.n, sys.p
    lam, V, s = eigen_supports(A, C, eps)
    scale = max(1.0, float(np.abs(lam).max()))
    real = np.all(np.abs(np.imag(lam)) <= 1e-10 * scale)
    lr = np.sort(np.real(lam))
    distinct = bool(np.all(np.diff(lr) > 1e-9 * scale)) if real else False
    from .lti import observability_rank

    conditions = {
        "distinct_real_positive_eigenvalues": bool(real and distinct and lr[0] > 0),
        "C_full_rank": bool(np.linalg.matrix_rank(C) == min(C.shape)),
        "observable": bool(observability_rank(A, C) == n),
    }
    T_star = None
    if q is not None and 2 * q < s.min():
        T_star = min_window_length(s, q, p, n)
    return CorrectabilityReport(
        eigenvalues=lam,
        eigenvectors=V,
        supports=s,
        p=p,
        n=n,
        q=q,
        T_star=T_star,
        conditions=conditions,
    )


def _window_bound(m, p, smin, smax, q):
    return ((m - 2) * p + smin) / (smax - 2 * q)


def min_window_length(supports, q, p, n=None):
    """Smallest window certified by the eigenvector support test for ``q`` errors.

    ``supports`` is a ``CorrectabilityReport`` or the sequence ``s_1..s_n``.
    For each subset size ``m`` the worst ratio
    ``((m-2) p + min S_m) / (max S_m - 2q)`` over ``m``-subsets is attained on
    a run of ``m`` consecutive sorted supports, so only ``n - m + 1``
    candidates are scanned.  ``T_m`` is the least integer strictly above that
    worst ratio and the result is ``max(n, T_2, ..., T_n)``.

    Raises
    ------
    NotCorrectable
        If ``2q >= min(supports)``.
    """
    if isinstance(supports, CorrectabilityReport):
        s = np.sort(supports.supports)
        n = supports.n if n is None else n
    else:
        s = np.sort(np.asarray(supports, dtype=int))
    n = s.size if n is None else n
    if s.size != n:
        raise DimensionError(f"expected {n} supports, got {s.size}")
    if q < 0:
        raise ValueError("q must be nonnegative")
    if 2 * q >= s[0]:
        raise NotCorrectable(f"s_min = {s[0]} does not exceed 2q = {2 * q}")
    T = n
    for m in range(2, n + 1):
        worst = max(
            _window_bound(m, p, s[i], s[i + m - 1], q) for i in range(n - m + 1)
        )
        T = max(T, math.floor(worst) + 1)
    return int(T)


def min_window_length_exhaustive(supports, q, p):
    """Same quantity as :func:`min_window_length` by enumerating every subset."""
    s = list(supports)
    n = len(s)
    if 2 * q >= min(s):
        raise NotCorrectable(f"s_min = {min(s)} does not exceed 2q = {2 * q}")
    T = n
    for m in range(2, n + 1):
        worst = max(
            _window_bound(m, p, min(c), max(c), q)
            for c in itertools.combinations(s, m)
        )
        T = max(T, math.floor(worst) + 1)
    return T


# empirical correctability


def sample_attack(rng, T, p, q, pattern="per_step", magnitude=1.0):
    """Random stacked attack ``E`` with a time-varying support.

    ``per_step`` corrupts between 0 and ``q`` sensors at every step, the
    count drawn uniformly.
    ``budget`` spreads ``q*T`` corrupted entries over the window in an
    arbitrary pattern, with ``2q`` of them at step 0 and none at step 1.
    Nonzero values are log-uniform in ``[1e-2, 1e3]`` with random sign,
    times ``magnitude``.
    """
    E = np.zeros((T, p))
    if pattern == "per_step":
        for k in range(T):
            E[k, rng.choice(p, size=int(rng.integers(0, q + 1)), replace=False)] = 1.0
    elif pattern == "budget":
        if 2 * q > p:
            raise ValueError("budget pattern needs 2q <= p")
        E[0, rng.choice(p, size=2 * q, replace=False)] = 1.0
        remaining = q * T - 2 * q
        pool = np.arange(2 * p, T * p)
        if remaining > 0 and pool.size:
            E.reshape(-1)[rng.choice(pool, size=min(remaining, pool.size), replace=False)] = 1.0
    else:
        raise ValueError(f"unknown attack pattern {pattern!r}")
    mask = E != 0
    vals = rng.choice([-1.0, 1.0], size=mask.sum()) * 10.0 ** rng.uniform(-2, 3, size=mask.sum())
    E[mask] = vals * magnitude
    return E


def exact_recovery(x0_hat, x0, rtol=1e-6):
    return bool(np.linalg.norm(x0_hat - x0) <= rtol * (1.0 + np.linalg.norm(x0)))


def check_q_correctable(sys, q, T, trials, seed=0, pattern="per_step", magnitude=1.0, config=None):
    """Monte-Carlo rate of exact initial-state recovery under ``q``-sparse attacks."""
    rng = np.random.default_rng(seed)
    dm = decoder_matrices(sys, T)
    hits = 0
    for _ in range(trials):
        x0 = rng.standard_normal(sys.n)
        E = sample_attack(rng, T, sys.p, q, pattern, magnitude)
        Y = dm.Phi @ x0 + E.reshape(-1)
        res = decode(dm, MeasurementWindow(Y=Y, T=T, p=sys.p), config)
        hits += exact_recovery(res.x0_hat, x0)
    return hits / trials if trials else float("nan")


__all__ = [
    "AttackEstimate",
    "CorrectabilityReport",
    "DecodeResult",
    "MeasurementWindow",
    "SolverConfig",
    "build_observability",
    "check_q_correctable",
    "correctability_report",
    "decode",
    "eigen_supports",
    "exact_recovery",
    "max_correctable_errors",
    "min_window_length",
    "min_window_length_exhaustive",
    "propagate_state",
    "residual_projection",
    "sample_attack",
    "state_from_attack",
]
