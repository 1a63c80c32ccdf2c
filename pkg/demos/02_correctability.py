"""Eigenvector supports of two quadrotor controllers and what they certify."""

from secest import LtiSystem, build_quadrotor, correctability_report, lqr_gain
from secest.quadrotor import STATE_NAMES
from secest.scenario import ScenarioConfig, make_design, make_selection

model = build_quadrotor()
sel = make_selection(ScenarioConfig(n_y=5))
print("sensors", [STATE_NAMES[i] for i in sel.indices])

lqr = lqr_gain(model, C=sel.C)
pp = make_design(model, sel.C, {})

for name, d in (("LQR", lqr), ("pole placement", pp)):
    rep = correctability_report(LtiSystem(A=d.A, C=sel.C))
    print(f"{name:15s} supports {[int(s) for s in rep.supports]}  q_max {rep.q_max}")

# window length that certifies two corrupted sensors per step
rep = correctability_report(LtiSystem(A=pp.A, C=sel.C), q=2)
print("T* for q = 2:", rep.T_star)
