"""Where l1 decoding struggles on the quadrotor.

One corrupted sensor per step, three ways: white noise on p_x, white noise
on a sensor that changes every step, and a slow ramp on p_x.  The last
column is a lower bound (random sign patterns, one LP each) on the worst ratio
||(Phi x) on p_x rows||_1 / ||(Phi x) elsewhere||_1 over states x.  l1 can
only recover every attack confined to p_x when that ratio is below one.
"""

import numpy as np
from scipy.optimize import linprog

from secest import LtiSystem, MeasurementWindow, decode, decoder_matrices
from secest.quadrotor import build_quadrotor
from secest.scenario import ScenarioConfig, make_design, make_selection

model = build_quadrotor()
C = make_selection(ScenarioConfig()).C
sys = LtiSystem(A=make_design(model, C, {}).A, C=C)
rng = np.random.default_rng(1)


def worst_ratio(Phi, rows):
    # max ||Phi_S x||_1 s.t. ||Phi_Sc x||_1 <= 1, via sign patterns of the best vertex
    best = 0.0
    other = np.setdiff1d(np.arange(Phi.shape[0]), rows)
    for _ in range(200):
        sgn = rng.choice([-1.0, 1.0], size=rows.size)
        n, m = Phi.shape[1], other.size
        # variables x (free) and t >= |Phi_Sc x|
        c = np.concatenate([-(sgn @ Phi[rows]), np.zeros(m)])
        A_ub = np.block([[Phi[other], -np.eye(m)], [-Phi[other], -np.eye(m)], [np.zeros((1, n)), np.ones((1, m))]])
        b_ub = np.concatenate([np.zeros(2 * m), [1.0]])
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * n + [(0, None)] * m, method="highs")
        if res.status == 0:
            best = max(best, np.abs(Phi[rows] @ res.x[:n]).sum())
    return best


for T in (10, 20, 46):
    dm = decoder_matrices(sys, T)
    hits = {"px white": 0, "moving white": 0, "px ramp": 0}
    for _ in range(50):
        x0 = rng.standard_normal(10)
        for kind in hits:
            E = np.zeros((T, 5))
            if kind == "px white":
                E[:, 0] = rng.standard_normal(T)
            elif kind == "moving white":
                E[np.arange(T), rng.integers(0, 5, size=T)] = rng.standard_normal(T)
            else:
                E[:, 0] = 0.05 * np.arange(1, T + 1)
            res = decode(dm, MeasurementWindow(Y=dm.Phi @ x0 + E.ravel(), T=T, p=5))
            hits[kind] += np.linalg.norm(res.x0_hat - x0) <= 1e-6 * (1 + np.linalg.norm(x0))
    ratio = worst_ratio(dm.Phi, np.arange(0, 5 * T, 5))
    print(f"T={T:2d}  " + "  ".join(f"{k} {v}/50" for k, v in hits.items()) + f"  p_x ratio {ratio:.2f}")
