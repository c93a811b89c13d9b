"""Invariant suites behind the ``check`` CLI verb.

Each suite returns a list of violation dicts (empty means pass).  The
suites are lighter-weight versions of the test-suite properties so they
can run quickly from the command line on any installation.
"""

import numpy as np

from . import _core
from .ct import (
    CtEstimatorState,
    ct_scalar_outputs,
    ct_step,
    extension_step,
    ExtensionState,
    to_extension_coords,
)
from .dt import DtEstimatorState, dt_outputs, dt_step
from .regression import (
    RegressionSample,
    identifiability_check,
    identity_map,
    ie_check_dt,
    mix,
)
from .scenarios import (
    DisturbanceSpec,
    ScenarioConfig,
    build_example5_ct,
    example5_gains,
    EXAMPLE5_ETA0,
    run_scenario,
)
from .synthetic import random_ct_lpre, random_lpre_dt, random_nlpre_dt


def _run_dt(phis, ys, map_, gains, eta0=None, theta0=None):
    p = phis.shape[1]
    eta0 = np.zeros(p) if eta0 is None else eta0
    theta0 = np.zeros(map_.dim_theta) if theta0 is None else theta0
    state = DtEstimatorState.initial(eta0, theta0, gains.f0)
    states = [state]
    for k in range(len(ys)):
        sample = RegressionSample(time=k, phi=phis[k], y=float(ys[k]))
        state = dt_step(state, sample, gains, map_)
        states.append(state)
    return states


def check_identities(n_cases: int = 20, steps: int = 60, seed: int = 0):
    """Master algebraic identities of both estimators."""
    from .dt import DtGains

    violations = []
    rng = np.random.default_rng(seed)
    # mixing preserves solutions
    for i in range(n_cases):
        p = int(rng.integers(1, 6))
        Phi = rng.normal(size=(p, p))
        g = rng.normal(size=p)
        mixed = mix(Phi @ g, Phi)
        resid = float(np.max(np.abs(mixed.cal_y - mixed.delta * g)))
        scale = max(1.0, abs(mixed.delta) * float(np.max(np.abs(g))))
        if resid > 1e-12 * scale:
            violations.append({"suite": "identities", "case": f"mix-{i}",
                               "residual": resid})
    # DT extended-regression identity
    for i in range(n_cases):
        q = int(rng.integers(1, 4))
        p = q + int(rng.integers(0, 3))
        phis, ys, map_, theta = random_nlpre_dt(rng, q, p, steps)
        gains = DtGains(f0=float(rng.uniform(0.2, 3.0)),
                        beta=float(rng.uniform(0.9, 1.0)), gamma=0.2)
        g_true = map_.g(theta)
        state = DtEstimatorState.initial(np.zeros(p), np.zeros(q), gains.f0)
        for k in range(len(ys)):
            zf0 = gains.f0 * state.z
            lhs = (np.eye(p) - zf0 * state.F) @ g_true
            rhs = state.eta_hat - zf0 * (state.F @ state.eta0)
            resid = float(np.max(np.abs(lhs - rhs)))
            if resid > 1e-10:
                violations.append({"suite": "identities",
                                   "case": f"dt-extended-{i}", "k": k,
                                   "residual": resid})
                break
            sample = RegressionSample(time=k, phi=phis[k], y=float(ys[k]))
            state = dt_step(state, sample, gains, map_)
    # CT least-squares identity on a short randomized run
    from .ct import CtGains

    for i in range(3):
        p = int(rng.integers(1, 4))
        sampler, theta = random_ct_lpre(rng, p)
        gains = CtGains(alpha=2.0, f0=1.0, beta0=0.1, gamma=1.0, m_bound=100.0)
        state = CtEstimatorState.initial(rng.normal(size=p), np.zeros(p), gains.f0)
        tilde0 = state.eta0 - theta
        h = 1e-3
        worst = 0.0
        for _ in range(int(2.0 / h)):
            state = ct_step(state, sampler, gains, identity_map(p), h)
            resid = np.linalg.solve(state.F, state.eta_hat - theta) \
                - state.z * gains.f0 * tilde0
            worst = max(worst, float(np.max(np.abs(resid))))
        if worst > 1e-6:
            violations.append({"suite": "identities", "case": f"ct-ls-{i}",
                               "residual": worst})
    return violations


def check_monotonicity(n_cases: int = 30, steps: int = 80, seed: int = 1):
    """Per-component error monotonicity of the linear DT estimator."""
    from .dt import DtGains

    violations = []
    rng = np.random.default_rng(seed)
    for i in range(n_cases):
        q = int(rng.integers(1, 6))
        phis, ys, theta = random_lpre_dt(rng, q, steps)
        gains = DtGains(f0=1.0, beta=1.0, gamma=float(rng.uniform(0.1, 1.0)))
        states = _run_dt(phis, ys, identity_map(q), gains)
        errs = np.abs(np.array([s.theta_hat for s in states]) - theta)
        growth = float(np.max(np.diff(errs, axis=0)))
        if growth > 1e-12:
            violations.append({"suite": "monotonicity", "case": f"lpre-{i}",
                               "growth": growth})
    return violations


def check_excitation(n_cases: int = 50, seed: int = 2):
    """Lemma-style agreement of the excitation and identifiability checks."""
    violations = []
    rng = np.random.default_rng(seed)
    for i in range(n_cases):
        q = int(rng.integers(1, 5))
        n = int(rng.integers(1, 12))
        if rng.random() < 0.4 and n >= q:
            # force a rank-deficient set
            base = rng.normal(size=(max(q - 1, 1), q))
            idx = rng.integers(0, base.shape[0], size=n)
            phis = base[idx] * rng.normal(size=(n, 1))
        else:
            phis = rng.normal(size=(n, q))
        ident = identifiability_check(phis)
        ie = ie_check_dt(phis, n - 1)
        agrees = ident == (ie.level > 1e-10 * max(1.0, float(np.max(phis ** 2))))
        if not agrees:
            violations.append({"suite": "excitation", "case": f"agree-{i}",
                               "identifiable": ident, "ie_level": ie.level})
    return violations


def check_robustness(seed: int = 3):
    """Bounded states under bounded disturbance (shortened horizons)."""
    violations = []
    cfg = ScenarioConfig(scenario="example4", horizon=5000,
                         disturbance=DisturbanceSpec(amplitude=0.1, seed=seed),
                         estimators=["dt_lpre"], record_every=50)
    run = run_scenario(cfg)["dt_lpre"]
    norms = np.array([r.err_norm for r in run.records])
    if run.failed or not np.all(np.isfinite(norms)):
        violations.append({"suite": "robustness", "case": "example4",
                           "reason": run.reason or "non-finite states"})
    else:
        tail = norms[int(0.9 * len(norms)):]
        if float(np.max(tail)) > float(np.max(norms)) + 1e-12:
            violations.append({"suite": "robustness", "case": "example4-trend",
                               "tail_max": float(np.max(tail)),
                               "global_max": float(np.max(norms))})
    return violations


def check_equivalence(seed: int = 4):
    """Main estimator vs dynamic-extension formulation on the CT scenario."""
    violations = []
    cfg = ScenarioConfig(scenario="example5", horizon=2.0)
    scenario = build_example5_ct(cfg)
    gains = example5_gains(cfg)
    h = cfg.h
    sampler = scenario.make_sampler(h)
    map3 = identity_map(3)
    s1 = CtEstimatorState.initial(EXAMPLE5_ETA0, np.zeros(3), gains.f0)
    s3 = ExtensionState.initial(3, np.zeros(3), gains.f0)
    worst = 0.0
    for _ in range(int(scenario.horizon / h)):
        s1 = ct_step(s1, sampler, gains, map3, h)
        s3 = extension_step(s3, sampler, gains, map3, h)
        Y, Phi = to_extension_coords(s1.eta_hat, s1.F, s1.z, s1.eta0, gains.f0)
        worst = max(worst,
                    float(np.max(np.abs(Y - s3.Y))),
                    float(np.max(np.abs(Phi - s3.Phi))),
                    float(np.max(np.abs(s1.theta_hat - s3.theta_hat))))
    if worst > 1e-6:
        violations.append({"suite": "equivalence", "case": "example5",
                           "max_deviation": worst})
    return violations


SUITES = {
    "identities": check_identities,
    "monotonicity": check_monotonicity,
    "excitation": check_excitation,
    "robustness": check_robustness,
    "equivalence": check_equivalence,
}


def run_suite(name: str):
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()
