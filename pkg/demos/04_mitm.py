"""Telemetry tampering: the drone flies fine, the ground station is fooled."""

import numpy as np

from secest import ScenarioConfig, run_scenario

rmse = {}
for seed in range(5):
    rep = run_scenario(ScenarioConfig(scenario="mitm", seed=seed))
    for mode, m in rep.metrics().items():
        rmse.setdefault(mode, []).append(m["state_rmse"])

for mode, v in rmse.items():
    print(f"{mode:9s} median state RMSE {np.median(v):.3f}")

# how well the attack itself was estimated on the last run
r = rep.modes["KfPlusSe"]
err = r.e_hat - rep.attack
print("attack estimate error, p_x channel, last 5 steps:", np.round(err[-5:, 0], 3))
