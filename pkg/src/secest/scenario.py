"""Quadrotor attack scenarios: configuration, simulation, metrics and file output.

Two experiments are supported.

``mitm``
    The plant flies under true-state feedback, so the attack never changes the
    path; a remote estimator sees only corrupted telemetry.
``gps``
    The plant is steered by its own estimate, so estimation errors bend the
    flown path away from the desired one.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kalman
from .attacks import AttackKind, AttackModel
from .decoder import SolverConfig, correctability_report
from .exceptions import ConfigError, MaxTriesExceeded
from .fusion import FusionEstimator, Mode, state_rmse
from .lti import LtiSystem
from .quadrotor import (
    POSITIONS,
    STATE_NAMES,
    MeasurementSelection,
    QuadrotorParams,
    build_quadrotor,
    default_pole_request,
    design_secure_feedback,
    lqr_gain,
    lqr_inspired_poles,
)

DEFAULT_WAYPOINTS = ((0.0, 0.0, 0.0), (0.0, 0.0, 3.0), (6.0, 4.0, 3.0), (10.0, 0.0, 3.0), (10.0, 0.0, 0.0))


@dataclass
class ScenarioConfig:
    scenario: str = "mitm"
    n_y: int = 5
    sensors: tuple | None = None
    selection_seed: int = 0
    plant: dict = field(default_factory=dict)
    controller: dict = field(default_factory=dict)
    attack: dict = field(default_factory=dict)
    noise_std: float = 0.01
    modes: tuple = ("KfOnly", "SeOnly", "KfPlusSe")
    T: int = 10
    K: int = 200
    waypoints: tuple = DEFAULT_WAYPOINTS
    seed: int = 0
    kf: dict = field(default_factory=dict)
    decoder: dict = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.scenario not in ("mitm", "gps"):
            raise ConfigError(f"scenario must be 'mitm' or 'gps', got {self.scenario!r}")
        if self.sensors is not None:
            self.sensors = tuple(int(i) for i in self.sensors)
            if len(self.sensors) != self.n_y:
                raise ConfigError("n_y does not match the number of listed sensors")
        if not 3 <= int(self.n_y) <= 10:
            raise ConfigError(f"n_y must be in 3..10, got {self.n_y}")
        if int(self.T) < 2:
            raise ConfigError("window T must be at least 2")
        if int(self.K) <= int(self.T):
            raise ConfigError("horizon K must exceed the window T")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be nonnegative")
        self.modes = tuple(Mode(m).value for m in self.modes)
        wp = np.asarray(self.waypoints, dtype=float)
        if wp.ndim != 2 or wp.shape[1] != 3 or wp.shape[0] < 1:
            raise ConfigError("waypoints must be a list of [x, y, z] points")
        self.waypoints = tuple(tuple(float(v) for v in w) for w in wp)
        unknown = set(self.controller) - {"kind", "poles", "initial", "max_tries", "seed"}
        if unknown:
            raise ConfigError(f"unknown controller keys {sorted(unknown)}")

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self):
        d = asdict(self)
        d["waypoints"] = [list(w) for w in self.waypoints]
        d["modes"] = list(self.modes)
        if self.sensors is not None:
            d["sensors"] = list(self.sensors)
        return d


@dataclass
class ModeResult:
    x_true: np.ndarray
    x_hat: np.ndarray
    e_hat: np.ndarray
    measurements: np.ndarray
    failures: list
    metrics: dict = field(default_factory=dict)


@dataclass
class RunReport:
    config: ScenarioConfig
    reference: np.ndarray
    attack: np.ndarray
    noise: np.ndarray
    modes: dict
    sensors: tuple
    design: dict
    correctability: dict
    stream_digests: dict

    def metrics(self):
        return {m: r.metrics for m, r in self.modes.items()}


# building blocks


def make_selection(cfg):
    if cfg.sensors is not None:
        return MeasurementSelection(cfg.sensors)
    return MeasurementSelection.random(int(cfg.n_y), np.random.default_rng(cfg.selection_seed))


def make_design(model, C, controller):
    """Feedback design requested by the ``controller`` config block."""
    kind = controller.get("kind", "pole_placement")
    lqr = lqr_gain(model, C=C)
    if kind == "lqr":
        return lqr
    if kind != "pole_placement":
        raise ConfigError(f"unknown controller kind {kind!r}")
    if controller.get("poles") is not None:
        initial = np.asarray(controller["poles"], dtype=float)
    elif controller.get("initial", "default") == "lqr":
        initial = lqr_inspired_poles(lqr)
    else:
        initial = default_pole_request(model.n)
    try:
        return design_secure_feedback(
            model,
            C,
            initial,
            max_tries=int(controller.get("max_tries", 1000)),
            seed=int(controller.get("seed", 0)),
        )
    except MaxTriesExceeded as exc:
        if exc.best is None:
            raise
        return exc.best


def waypoint_path(waypoints, K):
    """Piecewise-linear position samples at steps ``0..K`` with equal time per leg."""
    wp = np.asarray(waypoints, dtype=float)
    if wp.shape[0] == 1:
        return np.repeat(wp, K + 1, axis=0)
    s = np.linspace(0.0, wp.shape[0] - 1, K + 1)
    knots = np.arange(wp.shape[0])
    return np.column_stack([np.interp(s, knots, wp[:, i]) for i in range(3)])


def reference_trajectory(model, G, waypoints, K):
    """Smooth desired trajectory ``x_r`` and its feedforward ``u_r``.

    ``x_r`` is the plant itself, driven by ``u_r = G (x_r - w)`` toward the
    piecewise-linear waypoint path ``w``, so ``x_r(k+1) = A0 x_r(k) + B u_r(k)``
    holds exactly and a perfectly informed controller tracks it with zero error.
    """
    pos = waypoint_path(waypoints, K)
    W = np.zeros((K + 1, model.n))
    W[:, list(POSITIONS)] = pos
    dt = model.params.dt
    vel = np.gradient(pos, dt, axis=0) if K > 0 else np.zeros_like(pos)
    W[:, [1, 5, 9]] = vel
    Xr = np.zeros((K + 1, model.n))
    Ur = np.zeros((K, model.m))
    Xr[0] = W[0]
    for k in range(K):
        Ur[k] = G @ (Xr[k] - W[k])
        Xr[k + 1] = model.A0 @ Xr[k] + model.B @ Ur[k]
    return Xr, Ur


def _digest(*arrays):
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return h.hexdigest()


def _attack_model(cfg):
    params = dict(cfg.attack)
    default_kind = AttackKind.MITM_RAMP if cfg.scenario == "mitm" else AttackKind.GPS_SINUSOID
    params.setdefault("kind", default_kind)
    params.setdefault("seed", cfg.seed)
    try:
        return AttackModel(**params)
    except TypeError as exc:
        raise ConfigError(f"bad attack parameters: {exc}") from exc


def _solver_config(cfg):
    d = dict(cfg.decoder)
    if "support_eps" not in d:
        d["support_eps"] = 10.0 * cfg.noise_std if cfg.noise_std > 0 else None
    return SolverConfig(**d)


def _kf_initial(cfg, n, p, x0):
    kf = dict(cfg.kf)
    return kalman.KalmanState.initial(
        n,
        p,
        x0=x0,
        P0=float(kf.get("P0", 1.0)) * np.eye(n),
        meas_std=float(kf.get("meas_std", cfg.noise_std if cfg.noise_std > 0 else kalman.MEAS_STD)),
        process_var=float(kf.get("process_var", kalman.PROCESS_VAR)),
    )


def _metrics(res, reference, attack):
    err = res.e_hat - attack
    d = np.linalg.norm(res.x_true[:-1, list(POSITIONS)] - reference[:-1, list(POSITIONS)], axis=1)
    return {
        "state_rmse": state_rmse(res.x_true[:-1], res.x_hat),
        "position_rmse": state_rmse(res.x_true[:-1, list(POSITIONS)], res.x_hat[:, list(POSITIONS)]),
        "path_error": float(np.mean(d)) if d.size else 0.0,
        "attack_error_rms": float(np.sqrt(np.mean(err**2))) if err.size else 0.0,
        "decoder_failures": len(res.failures),
    }


def run_scenario(cfg):
    """Simulate every requested estimator mode on the same attack and noise streams."""
    if isinstance(cfg, dict):
        cfg = ScenarioConfig.from_dict(cfg)
    model = build_quadrotor(QuadrotorParams(**cfg.plant))
    sel = make_selection(cfg)
    C = sel.C
    p, n, K, T = sel.p, model.n, int(cfg.K), int(cfg.T)
    design = make_design(model, C, cfg.controller)
    G = design.G

    rep = correctability_report(LtiSystem(A=design.A, C=C))
    q = max(rep.q_max, 0)
    rep = correctability_report(LtiSystem(A=design.A, C=C), q=q)
    corr = rep.to_dict()
    corr["window_T"] = T
    corr["window_below_certificate"] = bool(rep.T_star is not None and T < rep.T_star)

    Xr, Ur = reference_trajectory(model, G, cfg.waypoints, K)
    attack = _attack_model(cfg).sequence(K, p)
    noise_rng = np.random.default_rng(np.random.SeedSequence([int(cfg.seed), 1]))
    noise = cfg.noise_std * noise_rng.standard_normal((K, p))
    solver = _solver_config(cfg)

    results = {}
    digests = {}
    if cfg.scenario == "mitm":
        Acl = model.A0 + model.B @ G
        known = Ur - Xr[:-1] @ G.T
        X = np.zeros((K + 1, n))
        X[0] = Xr[0]
        for k in range(K):
            X[k + 1] = Acl @ X[k] + model.B @ known[k]
        Y = X[:-1] @ C.T + attack + noise
        est_sys = LtiSystem(A=Acl, B=model.B, C=C)
        for mode in cfg.modes:
            est = FusionEstimator(est_sys, T, mode, kf=_kf_initial(cfg, n, p, X[0]), config=solver)
            Xh = np.zeros((K, n))
            Eh = np.zeros((K, p))
            for k in range(K):
                Xh[k], Eh[k] = est.step(Y[k], known[k - 1] if k else None)
            results[mode] = ModeResult(X.copy(), Xh, Eh, Y, list(est.events))
            digests[mode] = _digest(Y)
    else:
        est_sys = LtiSystem(A=model.A0, B=model.B, C=C)
        for mode in cfg.modes:
            est = FusionEstimator(est_sys, T, mode, kf=_kf_initial(cfg, n, p, Xr[0]), config=solver)
            X = np.zeros((K + 1, n))
            X[0] = Xr[0]
            Xh = np.zeros((K, n))
            Eh = np.zeros((K, p))
            Y = np.zeros((K, p))
            u = None
            for k in range(K):
                Y[k] = C @ X[k] + attack[k] + noise[k]
                Xh[k], Eh[k] = est.step(Y[k], u)
                u = Ur[k] + G @ (Xh[k] - Xr[k])
                X[k + 1] = model.A0 @ X[k] + model.B @ u
            results[mode] = ModeResult(X, Xh, Eh, Y, list(est.events))
            digests[mode] = _digest(attack, noise)

    for r in results.values():
        r.metrics = _metrics(r, Xr, attack)

    design_info = {
        "kind": design.kind,
        "G": design.G.tolist(),
        "eigenvalues_real": np.real(design.eigenvalues).tolist(),
        "eigenvalues_imag": np.imag(design.eigenvalues).tolist(),
        "requested_poles": None if design.requested is None else np.asarray(design.requested).tolist(),
        "tries": int(design.tries),
    }
    return RunReport(
        config=cfg,
        reference=Xr,
        attack=attack,
        noise=noise,
        modes=results,
        sensors=sel.indices,
        design=design_info,
        correctability=corr,
        stream_digests=digests,
    )


# output files


def _fmt(v):
    return repr(float(v))


def timeseries_header(report):
    p = len(report.sensors)
    cols = ["k"]
    cols += [f"ref_{s}" for s in STATE_NAMES]
    cols += [f"attack_{j}" for j in range(p)]
    for mode in report.modes:
        cols += [f"{mode}_x_{s}" for s in STATE_NAMES]
        cols += [f"{mode}_xhat_{s}" for s in STATE_NAMES]
        cols += [f"{mode}_ehat_{j}" for j in range(p)]
    return cols


def emit_outputs(report, out_dir):
    """Write ``timeseries.csv``, ``summary.json`` and ``attack_error_<mode>.csv``.

    Returns the list of written paths.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    K = report.attack.shape[0]
    paths = []

    ts = out / "timeseries.csv"
    with ts.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(timeseries_header(report))
        for k in range(K):
            row = [str(k)]
            row += [_fmt(v) for v in report.reference[k]]
            row += [_fmt(v) for v in report.attack[k]]
            for r in report.modes.values():
                row += [_fmt(v) for v in r.x_true[k]]
                row += [_fmt(v) for v in r.x_hat[k]]
                row += [_fmt(v) for v in r.e_hat[k]]
            w.writerow(row)
    paths.append(ts)

    for mode, r in report.modes.items():
        grid = out / f"attack_error_{mode}.csv"
        err = (r.e_hat - report.attack).T
        with grid.open("w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            for row in err:
                w.writerow([_fmt(v) for v in row])
        paths.append(grid)

    summary = {
        "config": report.config.to_dict(),
        "sensors": list(report.sensors),
        "sensor_names": [STATE_NAMES[i] for i in report.sensors],
        "design": report.design,
        "correctability": report.correctability,
        "metrics": report.metrics(),
        "decoder_failure_steps": {m: [int(k) for k, _ in r.failures] for m, r in report.modes.items()},
        "stream_digests": report.stream_digests,
    }
    sp = out / "summary.json"
    sp.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    paths.append(sp)
    return paths


def read_timeseries(path):
    """Parse ``timeseries.csv`` into ``{column: float array}``."""
    with Path(path).open(newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body]).reshape(len(body), len(header))
    return {h: data[:, i] for i, h in enumerate(header)}


def read_attack_error(path):
    with Path(path).open(newline="") as f:
        return np.array([[float(v) for v in r] for r in csv.reader(f)])
