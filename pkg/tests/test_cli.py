"""CLI surface: config parsing, overrides, exit codes, trace round trips."""

import json

import numpy as np
import pytest

from relaxls.cli import (
    ConfigError,
    config_to_json,
    main,
    parse_config,
)
from relaxls.scenarios import ScenarioConfig, run_scenario
from relaxls.trace_io import read_trace_csv, write_trace


# --------------------------------------------------------------------------
# config parsing
# --------------------------------------------------------------------------

def test_parse_minimal_config():
    cfg = parse_config('{"scenario": "example4"}')
    assert cfg.scenario == "example4"
    assert cfg.h == 1e-3 and cfg.seed == 0


def test_parse_full_config_roundtrip():
    cfg = ScenarioConfig(scenario="example5", horizon=2.0,
                         gains={"gamma": 10.0}, seed=4, record_every=5)
    again = parse_config(config_to_json(cfg))
    assert again.scenario == cfg.scenario
    assert again.horizon == cfg.horizon
    assert again.gains == cfg.gains
    assert again.seed == cfg.seed
    assert again.record_every == cfg.record_every


def test_parse_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config keys"):
        parse_config('{"scenario": "example4", "bogus": 1}')
    with pytest.raises(ConfigError, match="unknown disturbance keys"):
        parse_config('{"scenario": "example4", "disturbance": {"amp": 1}}')


def test_parse_rejects_bad_values():
    with pytest.raises(ConfigError, match="beta"):
        parse_config('{"scenario": "example4", "gains": {"beta": 1.5}}')
    with pytest.raises(ConfigError, match="gamma"):
        parse_config('{"scenario": "example4", "gains": {"gamma": -1}}')
    with pytest.raises(ConfigError, match="schema"):
        parse_config('{"scenario": "example4", "schema": 99}')
    with pytest.raises(ConfigError, match="scenario"):
        parse_config('{"h": 0.01}')
    with pytest.raises(ConfigError):
        parse_config('{"scenario": "unknown"}')
    with pytest.raises(ConfigError, match="JSON object"):
        parse_config('[1, 2]')


def test_parse_reports_error_location():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config('{\n "scenario": }')


# --------------------------------------------------------------------------
# run verb
# --------------------------------------------------------------------------

def test_run_writes_trace(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    code = main(["run", "--scenario", "example4", "--out", str(out),
                 "--set", "horizon=50", "--set", "estimators=[\"dt_lpre\"]"])
    assert code == 0
    records = read_trace_csv(str(out))
    assert len(records) == 50
    assert "example4/dt_lpre" in capsys.readouterr().out


def test_run_multiple_estimators_split_files(tmp_path):
    out = tmp_path / "trace.csv"
    code = main(["run", "--scenario", "example4", "--out", str(out),
                 "--set", "horizon=20"])
    assert code == 0
    assert (tmp_path / "trace.dt_lpre.csv").exists()
    assert (tmp_path / "trace.rls.csv").exists()


def test_run_failed_scenario_exit_code(tmp_path):
    # the switched closed-loop scenario diverges at its documented gain
    out = tmp_path / "t.csv"
    code = main(["run", "--scenario", "example8", "--out", str(out)])
    assert code == 1


def test_run_bad_config_exit_code(tmp_path, capsys):
    assert main(["run", "--scenario", "missing.json",
                 "--out", str(tmp_path / "t.csv")]) == 2
    assert main(["run", "--scenario", "example4", "--set", "nope=1",
                 "--out", str(tmp_path / "t.csv")]) == 2
    assert main(["run", "--scenario", "example4", "--set", "gains.beta=7",
                 "--out", str(tmp_path / "t.csv")]) == 2
    capsys.readouterr()


def test_run_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "scenario": "example4", "horizon": 30, "estimators": ["dt_lpre"]}))
    out = tmp_path / "t.csv"
    assert main(["run", "--scenario", str(cfg), "--out", str(out)]) == 0
    assert len(read_trace_csv(str(out))) == 30


def test_env_seed_override(tmp_path, monkeypatch):
    monkeypatch.setenv("RELAXLS_SEED", "42")
    out = tmp_path / "t.csv"
    code = main(["run", "--scenario", "example4", "--out", str(out),
                 "--set", "horizon=20", "--set", "estimators=[\"dt_lpre\"]",
                 "--set", "disturbance.amplitude=0.1"])
    assert code == 0
    seeded = read_trace_csv(str(out))
    monkeypatch.setenv("RELAXLS_SEED", "43")
    code = main(["run", "--scenario", "example4", "--out", str(out),
                 "--set", "horizon=20", "--set", "estimators=[\"dt_lpre\"]",
                 "--set", "disturbance.amplitude=0.1"])
    assert code == 0
    reseeded = read_trace_csv(str(out))
    assert any(a.y != b.y for a, b in zip(seeded, reseeded))


def test_run_byte_identical(tmp_path):
    args = ["run", "--scenario", "example4", "--set", "horizon=40",
            "--set", "estimators=[\"dt_lpre\"]",
            "--set", "disturbance.amplitude=0.05"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


# --------------------------------------------------------------------------
# trace io
# --------------------------------------------------------------------------

def test_csv_roundtrip_full_precision(tmp_path):
    cfg = ScenarioConfig(scenario="example4", horizon=25,
                         estimators=["dt_lpre"])
    records = run_scenario(cfg)["dt_lpre"].records
    path = tmp_path / "t.csv"
    write_trace(records, "csv", str(path))
    back = read_trace_csv(str(path))
    assert len(back) == len(records)
    for ra, rb in zip(records, back):
        assert ra.theta_hat == rb.theta_hat      # 17 digits round-trip doubles
        assert ra.delta == rb.delta
        assert ra.y == rb.y


def test_json_trace(tmp_path):
    cfg = ScenarioConfig(scenario="example4", horizon=10,
                         estimators=["dt_lpre"])
    records = run_scenario(cfg)["dt_lpre"].records
    path = tmp_path / "t.json"
    write_trace(records, "json", str(path))
    payload = json.loads(path.read_text())
    assert len(payload) == 10
    assert payload[0]["t"] == 0.0
    assert "theta_hat_1" in payload[0] and "y" in payload[0]


def test_write_trace_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        write_trace([], "xml", str(tmp_path / "t.xml"))


# --------------------------------------------------------------------------
# check / excite / sweep verbs
# --------------------------------------------------------------------------

def test_check_suite_passes(capsys):
    assert main(["check", "identities"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and report["violations"] == []


def test_check_unknown_suite(capsys):
    assert main(["check", "bogus"]) == 2
    capsys.readouterr()


def test_excite_verb(capsys):
    assert main(["excite", "--scenario", "example4", "--k-c", "5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["scenario"] == "example4"
    assert report["excited"] is True


def test_sweep_verb(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"gains.gamma": [0.2, 0.4], "horizon": [20]}))
    out_dir = tmp_path / "sweep"
    code = main(["sweep", "--scenario", "example4", "--grid", str(grid),
                 "--out-dir", str(out_dir)])
    assert code == 0
    produced = sorted(p.name for p in out_dir.iterdir())
    assert "run000.dt_lpre.csv" in produced
    assert "run001.dt_lpre.csv" in produced
    capsys.readouterr()


def test_sweep_bad_grid(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text("[]")
    assert main(["sweep", "--scenario", "example4", "--grid", str(grid),
                 "--out-dir", str(tmp_path / "o")]) == 2
    capsys.readouterr()
