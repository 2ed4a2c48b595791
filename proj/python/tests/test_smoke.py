import json

import pytest

import ufsim


def test_presets_listed():
    names = ufsim.presets()
    assert "min_max" in names
    assert "lock_inversion" in names


def test_scenario_round_trip():
    cfg = ufsim.scenario_json("solo_bound", policy="eevdf")
    assert cfg["policy"] == "eevdf"
    again = ufsim.scenario_json(json.dumps(cfg))
    assert again == cfg


def test_run_report_shape():
    report = ufsim.run("solo_bursty", policy="ufs", duration="2s", warmup="1s")
    assert report["policy"] == "ufs"
    assert report["window_start_ns"] == 1_000_000_000
    bursty = report["workloads"]["bursty"]
    assert bursty["completed"] > 0
    assert len(report["cpus"]) == 8


def test_runs_are_deterministic():
    a = ufsim.trace("min_max", duration="500ms", warmup="0", seed=3)
    b = ufsim.trace("min_max", duration="500ms", warmup="0", seed=3)
    assert a == b
    assert a.splitlines()[0] == "time_ns,cpu,kind,arg1,arg2,arg3"


def test_config_errors_raise_value_error():
    with pytest.raises(ValueError, match="line 1"):
        ufsim.validate('{"cpus": 1, "nope": 2}')
    with pytest.raises(ufsim.ConfigError):
        ufsim.run("solo_bound", policy="cfs")


def test_property_checks_hold():
    assert ufsim.property_failures() == []
