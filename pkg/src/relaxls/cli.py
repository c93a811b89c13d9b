"""Command-line surface: run scenarios, print excitation reports, run
invariant suites and parameter sweeps.

Exit codes: 0 success, 1 violation or divergence, 2 usage/config error.
"""

import argparse
import itertools
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from .checks import SUITES, run_suite
from .regression import ConfigurationError
from .scenarios import (
    SCENARIO_NAMES,
    DisturbanceSpec,
    ScenarioConfig,
    build_example4_dt,
    build_example5_ct,
    build_example8_switched,
    run_scenario,
)
from .trace_io import write_trace

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema", "scenario", "theta", "horizon", "h", "lam", "gains",
             "m_bound", "disturbance", "estimators", "seed", "record_every"}
_DIST_KEYS = {"amplitude", "seed", "generator"}
_GAIN_BOUNDS = {
    "alpha": ("alpha > 0", lambda v: v > 0),
    "f0": ("f0 > 0", lambda v: v > 0),
    "beta0": ("beta0 > 0", lambda v: v > 0),
    "beta": ("beta in (0, 1]", lambda v: 0 < v <= 1),
    "gamma": ("gamma > 0", lambda v: v > 0),
}


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario config; unknown keys rejected."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if raw.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {raw['schema']}")
    if "scenario" not in raw:
        raise ConfigError("config must name a scenario")

    gains = dict(raw.get("gains", {}))
    for key, value in gains.items():
        if key in _GAIN_BOUNDS:
            bound, ok = _GAIN_BOUNDS[key]
            if not ok(value):
                raise ConfigError(f"gain {key}={value} violates {bound}")
    dist_raw = dict(raw.get("disturbance", {}))
    unknown = set(dist_raw) - _DIST_KEYS
    if unknown:
        raise ConfigError(f"unknown disturbance keys: {sorted(unknown)}")
    try:
        config = ScenarioConfig(
            scenario=raw["scenario"],
            theta=raw.get("theta"),
            horizon=raw.get("horizon"),
            h=raw.get("h", 1e-3),
            lam=raw.get("lam", 1.0),
            gains=gains,
            m_bound=raw.get("m_bound"),
            disturbance=DisturbanceSpec(**dist_raw),
            estimators=raw.get("estimators"),
            seed=raw.get("seed", 0),
            record_every=raw.get("record_every", 1),
        )
    except (ConfigurationError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return config


def config_to_json(config: ScenarioConfig) -> str:
    """Serialize a config back to canonical JSON (round-trips parse_config)."""
    payload = {
        "schema": SCHEMA_VERSION,
        "scenario": config.scenario,
        "h": config.h,
        "lam": config.lam,
        "gains": config.gains,
        "disturbance": asdict(config.disturbance),
        "seed": config.seed,
        "record_every": config.record_every,
    }
    if config.theta is not None:
        payload["theta"] = config.theta
    if config.horizon is not None:
        payload["horizon"] = config.horizon
    if config.m_bound is not None:
        payload["m_bound"] = config.m_bound
    if config.estimators is not None:
        payload["estimators"] = config.estimators
    return json.dumps(payload, sort_keys=True, indent=1)


def _load_config(spec: str) -> ScenarioConfig:
    if spec in SCENARIO_NAMES:
        return ScenarioConfig(scenario=spec)
    with open(spec) as fh:
        return parse_config(fh.read())


def _apply_override(config: ScenarioConfig, item: str) -> ScenarioConfig:
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like key=value")
    key, _, value = item.partition("=")
    try:
        value = json.loads(value)
    except json.JSONDecodeError:
        pass  # keep as string
    head, _, tail = key.partition(".")
    if head == "gains":
        config.gains[tail] = value
        if tail in _GAIN_BOUNDS:
            bound, ok = _GAIN_BOUNDS[tail]
            if not ok(value):
                raise ConfigError(f"gain {tail}={value} violates {bound}")
    elif head == "disturbance":
        if tail not in _DIST_KEYS:
            raise ConfigError(f"unknown disturbance key {tail!r}")
        setattr(config.disturbance, tail, value)
    elif head in _TOP_KEYS - {"gains", "disturbance", "schema"}:
        setattr(config, head, value)
    else:
        raise ConfigError(f"unknown config key {key!r}")
    return config


def _apply_env_seed(config: ScenarioConfig):
    seed = os.environ.get("RELAXLS_SEED")
    if seed is not None:
        config.seed = int(seed)
        config.disturbance.seed = int(seed)
    return config


def _cmd_run(args) -> int:
    config = _load_config(args.scenario)
    for item in args.set or []:
        config = _apply_override(config, item)
    config = _apply_env_seed(config)
    results = run_scenario(config)
    failed = False
    base, ext = os.path.splitext(args.out)
    multi = len(results) > 1
    for name, run in results.items():
        path = f"{base}.{name}{ext}" if multi else args.out
        write_trace(run.records, args.format, path)
        status = "FAILED" if run.failed else "ok"
        if run.failed:
            failed = True
        print(f"{config.scenario}/{name}: {len(run.records)} records -> {path} "
              f"[{status}{': ' + run.reason if run.reason else ''}]")
    return 1 if failed else 0


def _cmd_check(args) -> int:
    try:
        violations = run_suite(args.suite)
    except KeyError:
        print(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return 2
    report = {"suite": args.suite, "violations": violations,
              "passed": not violations}
    print(json.dumps(report, indent=1, default=float))
    return 0 if not violations else 1


def _cmd_excite(args) -> int:
    from .regression import ie_check_ct, ie_check_dt

    config = _load_config(args.scenario)
    config = _apply_env_seed(config)
    if config.scenario == "example5":
        scenario = build_example5_ct(config)
        ts, phis, _ = scenario.trajectory(config.h)
        t_c = args.t_c if args.t_c is not None else scenario.horizon
        report = ie_check_ct(phis, config.h, t_c)
    elif config.scenario == "example4":
        scenario = build_example4_dt(config)
        k_c = args.k_c if args.k_c is not None else len(scenario.ys) - 1
        report = ie_check_dt(scenario.phis, int(k_c))
    else:
        # closed-loop regressor: replay the scenario and stack its phis
        from .scenarios import run_example8

        scenario = build_example8_switched(config)
        run = run_example8(scenario)
        ys = [r.y for r in run.records]
        us = [r.u for r in run.records]
        y_hist = [-0.2, 0.4]
        u_hist = [0.0, 0.0]
        phis = []
        for k in range(len(ys)):
            phis.append([-y_hist[0], -y_hist[1], u_hist[0], u_hist[1]])
            y_hist = [ys[k], y_hist[0]]
            u_hist = [us[k], u_hist[0]]
        k_c = args.k_c if args.k_c is not None else len(phis) - 1
        report = ie_check_dt(np.asarray(phis), int(k_c))
    print(json.dumps({"scenario": config.scenario, "excited": report.excited,
                      "level": report.level, "window_end": report.window_end}))
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args.scenario)
    config = _apply_env_seed(config)
    with open(args.grid) as fh:
        grid = json.load(fh)
    if not isinstance(grid, dict) or not grid:
        print("grid must be a non-empty JSON object of key -> value list",
              file=sys.stderr)
        return 2
    keys = sorted(grid)
    os.makedirs(args.out_dir, exist_ok=True)
    failed = False
    for i, combo in enumerate(itertools.product(*(grid[k] for k in keys))):
        cfg = _load_config(args.scenario)
        cfg = _apply_env_seed(cfg)
        for key, value in zip(keys, combo):
            cfg = _apply_override(cfg, f"{key}={json.dumps(value)}")
        results = run_scenario(cfg)
        for name, run in results.items():
            path = os.path.join(args.out_dir, f"run{i:03d}.{name}.csv")
            write_trace(run.records, "csv", path)
            if run.failed:
                failed = True
        print(f"run{i:03d}: " + ", ".join(f"{k}={v}" for k, v in zip(keys, combo)))
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaxls",
        description="Interlaced least-squares estimator scenarios and checks")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a scenario and export traces")
    p_run.add_argument("--scenario", required=True,
                       help="scenario name or config path")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="config override, e.g. gains.gamma=500")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--format", choices=("csv", "json"), default="csv")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="run an invariant suite")
    p_check.add_argument("suite")
    p_check.set_defaults(func=_cmd_check)

    p_exc = sub.add_parser("excite", help="print an excitation report")
    p_exc.add_argument("--scenario", required=True)
    p_exc.add_argument("--t-c", type=float, default=None)
    p_exc.add_argument("--k-c", type=int, default=None)
    p_exc.set_defaults(func=_cmd_excite)

    p_sweep = sub.add_parser("sweep", help="grid of runs from a sweep file")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--grid", required=True)
    p_sweep.add_argument("--out-dir", default="sweep_out")
    p_sweep.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConfigurationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
