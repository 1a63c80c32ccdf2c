import dataclasses
import json

import numpy as np
import pytest

from secest.exceptions import ConfigError
from secest.fusion import state_rmse
from secest.quadrotor import STATE_NAMES
from secest.scenario import (
    ScenarioConfig,
    emit_outputs,
    read_attack_error,
    read_timeseries,
    run_scenario,
    timeseries_header,
    waypoint_path,
)

SHORT = {"K": 40}


@pytest.fixture(scope="module")
def mitm_report():
    return run_scenario(ScenarioConfig(scenario="mitm", **SHORT))


def test_config_validation():
    for bad in ({"n_y": 2}, {"T": 1}, {"K": 5, "T": 10}, {"scenario": "x"}, {"modes": ["Kf"]}, {"bogus": 1}):
        with pytest.raises(ConfigError):
            ScenarioConfig.from_dict(bad)


def test_config_load(tmp_path):
    with pytest.raises(ConfigError):
        ScenarioConfig.load(tmp_path / "missing.json")
    p = tmp_path / "c.json"
    p.write_text(json.dumps(ScenarioConfig(n_y=8, seed=4).to_dict()))
    assert ScenarioConfig.load(p) == ScenarioConfig(n_y=8, seed=4)


def test_waypoints_interpolate():
    w = waypoint_path([(0, 0, 0), (2, 0, 0)], 4)
    np.testing.assert_allclose(w[:, 0], [0, 0.5, 1, 1.5, 2])


def test_quiet_run_is_exact_for_every_mode():
    for scenario in ("mitm", "gps"):
        cfg = ScenarioConfig(scenario=scenario, noise_std=0.0, attack={"kind": "None"}, **SHORT)
        rep = run_scenario(cfg)
        paths = [r.x_true for r in rep.modes.values()]
        for r in rep.modes.values():
            assert r.metrics["state_rmse"] <= 1e-6
        for p in paths[1:]:
            np.testing.assert_allclose(p, paths[0], atol=1e-6)


def test_mitm_attack_leaves_path_alone(mitm_report):
    for r in mitm_report.modes.values():
        assert r.metrics["path_error"] < 1e-9


def test_modes_share_one_stream(mitm_report):
    assert len(set(mitm_report.stream_digests.values())) == 1
    gps = run_scenario(ScenarioConfig(scenario="gps", **SHORT))
    assert len(set(gps.stream_digests.values())) == 1


def test_outputs_round_trip(mitm_report, tmp_path):
    emit_outputs(mitm_report, tmp_path)
    ts = read_timeseries(tmp_path / "timeseries.csv")
    summary = json.loads((tmp_path / "summary.json").read_text())
    for mode in mitm_report.modes:
        x = np.column_stack([ts[f"{mode}_x_{s}"] for s in STATE_NAMES])
        xh = np.column_stack([ts[f"{mode}_xhat_{s}"] for s in STATE_NAMES])
        assert abs(state_rmse(x, xh) - summary["metrics"][mode]["state_rmse"]) <= 1e-12
        grid = read_attack_error(tmp_path / f"attack_error_{mode}.csv")
        r = mitm_report.modes[mode]
        assert np.array_equal(grid, (r.e_hat - mitm_report.attack).T)
    assert summary["correctability"]["q_max"] == 2


def test_outputs_are_deterministic(tmp_path):
    for d in ("a", "b"):
        emit_outputs(run_scenario(ScenarioConfig(scenario="gps", seed=3, **SHORT)), tmp_path / d)
    for name in ("timeseries.csv", "summary.json", "attack_error_KfPlusSe.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_horizon_writes_header_only(mitm_report, tmp_path):
    empty = dataclasses.replace(
        mitm_report,
        attack=mitm_report.attack[:0],
        modes={
            m: dataclasses.replace(r, x_true=r.x_true[:0], x_hat=r.x_hat[:0], e_hat=r.e_hat[:0])
            for m, r in mitm_report.modes.items()
        },
    )
    emit_outputs(empty, tmp_path)
    lines = (tmp_path / "timeseries.csv").read_text().splitlines()
    assert lines == [",".join(timeseries_header(empty))]
