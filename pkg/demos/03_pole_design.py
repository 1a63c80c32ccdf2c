"""Perturb an LQR-like pole set until every mode is seen by every sensor."""

import numpy as np

from secest import build_quadrotor, design_secure_feedback, lqr_gain
from secest.quadrotor import lqr_inspired_poles
from secest.scenario import ScenarioConfig, make_selection

model = build_quadrotor()
C = make_selection(ScenarioConfig(n_y=5)).C

request = lqr_inspired_poles(lqr_gain(model, C=C))
print("request ", np.round(request, 3))

d = design_secure_feedback(model, C, request, seed=0)
print("achieved", np.round(np.sort(d.eigenvalues.real), 3))
print("tries", d.tries, "supports", [int(s) for s in d.report.supports], "q_max", d.report.q_max)
print("spectral radius", np.abs(d.eigenvalues).max())
