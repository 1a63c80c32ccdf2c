"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test records a PASS/FAIL line (see ``verdicts.py``) before asserting,
so the summary at the end of a pytest run lists every criterion.
"""

import io
import time
from contextlib import redirect_stdout

import numpy as np
import pytest

from oracles import l0_decoder_oracle, l1_vertex_oracle, window_length_oracle
from secest.cli import main as cli_main
from secest.decoder import (
    MeasurementWindow,
    correctability_report,
    decode,
    exact_recovery,
    min_window_length,
    sample_attack,
)
from secest.l1 import L1Problem, solve_l1_equality
from secest.lti import LtiSystem, decoder_matrices, save_system
from secest.quadrotor import design_secure_feedback, lqr_inspired_poles
from secest.scenario import ScenarioConfig, run_scenario
from verdicts import record

TRIALS = 500
WINDOW = 10
Q = 2


def _recovery_rate(system, pattern, magnitude, seed=2024):
    """Exact-recovery fraction over seeded noise-free trials."""
    rng = np.random.default_rng(seed)
    dm = decoder_matrices(system, WINDOW)
    hits = 0
    for _ in range(TRIALS):
        x0 = rng.standard_normal(system.n)
        E = sample_attack(rng, WINDOW, system.p, Q, pattern, magnitude)
        if pattern == "budget":
            sizes = np.count_nonzero(E, axis=1)
            assert sizes[0] == 2 * Q and sizes[1] == 0 and sizes.sum() <= Q * WINDOW
        else:
            assert np.count_nonzero(E, axis=1).max() <= Q
        Y = dm.Phi @ x0 + E.reshape(-1)
        res = decode(dm, MeasurementWindow(Y=Y, T=WINDOW, p=system.p))
        hits += exact_recovery(res.x0_hat, x0, rtol=1e-6)
    return hits / TRIALS


@pytest.fixture(scope="module")
def base_rate(pp_system):
    t0 = time.perf_counter()
    rate = _recovery_rate(pp_system, "per_step", 1.0)
    return rate, time.perf_counter() - t0


def test_c01_decoder_exactness(pp_system, base_rate):
    assert list(correctability_report(pp_system).supports) == [5] * 10
    rate, seconds = base_rate

    # small-window batch where the sparsest explanation can be enumerated (p*T = 20)
    T_small = 4
    dm = decoder_matrices(pp_system, T_small)
    rng = np.random.default_rng(7)
    agree, small = 0, 30
    for _ in range(small):
        x0 = rng.standard_normal(pp_system.n)
        E = sample_attack(rng, T_small, pp_system.p, Q)
        Y = dm.Phi @ x0 + E.reshape(-1)
        res = decode(dm, MeasurementWindow(Y=Y, T=T_small, p=pp_system.p))
        _, states = l0_decoder_oracle(dm.Phi, Y, pp_system.n)
        agree += any(exact_recovery(res.x0_hat, x) for x in states)

    ok = rate >= 0.95 and agree == small and seconds <= 120
    record(
        1,
        "decoder exactness",
        ok,
        f"rate {rate:.3f} (need >= 0.95) over {TRIALS} trials in {seconds:.1f}s; "
        f"l0 agreement {agree}/{small} at T={T_small} (need all)",
    )
    assert ok


def test_c02_max_correctable_bound(pp_design, lqr_design, selection, tmp_path):
    path = tmp_path / "pp.json"
    save_system(LtiSystem(A=pp_design.A, C=selection.C), path)
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli_main(["analyze", str(path)])
    printed = [ln for ln in buf.getvalue().splitlines() if ln.startswith("q_max")]
    pp_q = int(printed[0].split("=")[1]) if printed else None

    lqr_rep = lqr_design.report
    # a hand-built design whose first mode is seen by a single sensor
    A = np.diag([0.3, 0.4, 0.5, 0.6, 0.7, 0.8])
    C = np.column_stack([np.eye(5)[0], np.random.default_rng(2).uniform(0.5, 1.5, size=(5, 5))])
    single = correctability_report(LtiSystem(A=A, C=C))

    ok = (
        code == 0
        and pp_q == 2
        and min(lqr_rep.supports) == 1
        and lqr_rep.q_max == 0
        and single.q_max == 0
    )
    record(
        2,
        "max-correctable bound",
        ok,
        f"analyze q_max={pp_q} (need 2); LQR supports {[int(s) for s in lqr_rep.supports]} "
        f"q_max={lqr_rep.q_max}; single-sensor mode q_max={single.q_max} (need 0)",
    )
    assert ok


def test_c03_budget_relaxed_attacks(pp_system):
    rate = _recovery_rate(pp_system, "budget", 1.0)
    ok = rate >= 0.95
    record(3, "budget-relaxed attacks", ok, f"rate {rate:.3f} (need >= 0.95)")
    assert ok


def test_c04_window_formula():
    rng = np.random.default_rng(4)
    cases = mismatches = 0
    for n in range(2, 11):
        for p in range(1, 11):
            for _ in range(3):
                s = rng.integers(1, p + 1, size=n)
                for q in range(0, (int(s.min()) - 1) // 2 + 1):
                    cases += 1
                    mismatches += min_window_length(s, q, p, n) != window_length_oracle(s, q, p)
    worked = min_window_length([5] * 10, 2, 5, 10)
    ok = mismatches == 0 and cases > 0 and worked == 46
    record(4, "window formula", ok, f"{cases - mismatches}/{cases} grid cases match; T* = {worked} (need 46)")
    assert ok


def test_c05_l1_solver_optimality():
    rng = np.random.default_rng(5)
    worst_rel = worst_res = 0.0
    for i in range(200):
        r = int(rng.integers(1, 9))
        c = int(rng.integers(r + 1, 17))
        M = rng.standard_normal((r, c))
        if i % 2:
            e = np.zeros(c)
            e[rng.choice(c, size=int(rng.integers(1, r + 1)), replace=False)] = rng.standard_normal()
            b = M @ e
        else:
            b = rng.standard_normal(r)
        sol = solve_l1_equality(L1Problem(M, b))
        ref, _ = l1_vertex_oracle(M, b)
        worst_rel = max(worst_rel, abs(sol.objective - ref) / max(abs(ref), 1e-300))
        worst_res = max(worst_res, float(np.linalg.norm(M @ sol.e_hat - b)))
    ok = worst_rel <= 1e-6 and worst_res <= 1e-8
    record(5, "l1 solver optimality", ok, f"worst relative gap {worst_rel:.1e}, worst residual {worst_res:.1e}")
    assert ok


def test_c06_mitm_ordering():
    t0 = time.perf_counter()
    rm = {m: [] for m in ("KfOnly", "SeOnly", "KfPlusSe")}
    for seed in range(10):
        rep = run_scenario(ScenarioConfig(scenario="mitm", n_y=5, seed=seed))
        for m in rm:
            rm[m].append(rep.modes[m].metrics["state_rmse"])
    seconds = time.perf_counter() - t0
    med = {m: float(np.median(v)) for m, v in rm.items()}
    ok = (
        med["KfPlusSe"] <= 0.1 * med["KfOnly"]
        and med["KfPlusSe"] < med["SeOnly"] < med["KfOnly"]
        and seconds <= 60
    )
    record(
        6,
        "MITM ordering",
        ok,
        "median RMSE " + ", ".join(f"{m}={v:.3f}" for m, v in med.items())
        + f" (need KfPlusSe <= 0.1*KfOnly, KfPlusSe < SeOnly < KfOnly); {seconds:.1f}s",
    )
    assert ok


def test_c07_gps_sweep():
    seeds = range(5)
    path = {}
    for n_y in (3, 5, 8):
        per = {"KfOnly": [], "KfPlusSe": []}
        for seed in seeds:
            cfg = ScenarioConfig(
                scenario="gps", n_y=n_y, seed=seed, selection_seed=seed, modes=("KfOnly", "KfPlusSe")
            )
            rep = run_scenario(cfg)
            for m in per:
                per[m].append(rep.modes[m].metrics["path_error"])
        path[n_y] = {m: float(np.median(v)) for m, v in per.items()}
    se = [path[k]["KfPlusSe"] for k in (3, 5, 8)]
    kf = [path[k]["KfOnly"] for k in (3, 5, 8)]
    decreasing = se[0] > se[1] > se[2]
    small = se[2] <= 0.05 * kf[2]
    flat = (max(kf) - min(kf)) / min(kf) < 0.25
    ok = decreasing and small and flat
    record(
        7,
        "GPS sweep",
        ok,
        f"KfPlusSe path error {[round(v, 3) for v in se]} (strictly decreasing: {decreasing}; "
        f"n_y=8 <= 0.05*KfOnly: {small}); KfOnly {[round(v, 3) for v in kf]} (flat within 25%: {flat})",
    )
    assert ok


def test_c08_reduction():
    worst = 0.0
    for scenario in ("mitm", "gps"):
        cfg = ScenarioConfig(
            scenario=scenario,
            noise_std=0.0,
            attack={"kind": "None"},
            modes=("KfOnly", "KfPlusSe"),
        )
        rep = run_scenario(cfg)
        d = np.abs(rep.modes["KfPlusSe"].x_hat - rep.modes["KfOnly"].x_hat).max()
        worst = max(worst, float(d))
    ok = worst <= 1e-10
    record(8, "fusion reduces to the Kalman filter", ok, f"max per-step difference {worst:.1e} (need <= 1e-10)")
    assert ok


def test_c09_pole_placement_loop(quad, selection, lqr_design):
    request = lqr_inspired_poles(lqr_design)
    d = design_secure_feedback(quad, selection.C, request, max_tries=1000, seed=0)
    lam = np.sort(np.real(d.eigenvalues))
    dev = float(np.max(np.abs(lam - np.sort(request))))
    rho = float(np.max(np.abs(d.eigenvalues)))
    ok = d.tries < 1000 and list(d.report.supports) == [5] * 10 and dev <= 0.05 and rho < 1
    record(
        9,
        "pole-placement design loop",
        ok,
        f"tries {d.tries}, supports {[int(s) for s in d.report.supports]}, "
        f"eigenvalue deviation {dev:.1e}, spectral radius {rho:.3f}",
    )
    assert ok


def test_c10_unbounded_attacks(pp_system, base_rate):
    rate = _recovery_rate(pp_system, "per_step", 1e6)
    ok = abs(rate - base_rate[0]) <= 0.02
    record(10, "unbounded attacks", ok, f"rate x1e6 {rate:.3f} vs x1 {base_rate[0]:.3f} (need within 0.02)")
    assert ok
