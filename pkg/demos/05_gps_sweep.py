"""Spoofed position fixes steer the drone; does adding sensors help?"""

import numpy as np

from secest import ScenarioConfig, run_scenario

for n_y in (3, 5, 8):
    errs = {"KfOnly": [], "KfPlusSe": []}
    for seed in range(3):
        cfg = ScenarioConfig(scenario="gps", n_y=n_y, seed=seed, selection_seed=seed, modes=tuple(errs))
        for mode, m in run_scenario(cfg).metrics().items():
            errs[mode].append(m["path_error"])
    print(f"n_y={n_y}", "  ".join(f"{k} {np.median(v):.3f}" for k, v in errs.items()))
