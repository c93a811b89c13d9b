"""Reproducible simulation scenarios and the trace-producing runner.

Three scenarios are built in: a second-order continuous-time plant
identified through first-order filters ("example5", with a linear and a
reduced nonlinear parameterization), a first-order discrete-time plant
("example4"), and a switched discrete-time plant under indirect adaptive
pole-placement control ("example8").
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import _core
from .baselines import GradientState, RlsState, gradient_step_dt, rls_step_dt
from .ct import (
    CtEstimatorState,
    CtGains,
    IntegrationBlowupError,
    ct_scalar_outputs,
    ct_step,
)
from .dt import (
    CovarianceError,
    DtEstimatorState,
    DtGains,
    SwitchSchedule,
    SwitchedDtState,
    dt_outputs,
    dt_step,
    switched_outputs,
    switched_step,
)
from .regression import (
    ConfigurationError,
    MonotoneMap,
    RegressionSample,
    identity_map,
)

SCENARIO_NAMES = ("example5", "example4", "example8")


# --------------------------------------------------------------------------
# configuration and trace records
# --------------------------------------------------------------------------

@dataclass
class DisturbanceSpec:
    """Additive perturbation d = d_y + d_theta' phi + d_phi' g(theta).

    Each component is drawn uniformly in [-amplitude, amplitude] per step
    from a seeded generator; the generator algorithm is pinned by name so
    traces are bit-reproducible.
    """

    amplitude: float = 0.0
    seed: int = 0
    generator: str = "pcg64"

    def __post_init__(self):
        if self.amplitude < 0:
            raise ConfigurationError("disturbance amplitude must be >= 0")

    def make_rng(self) -> np.random.Generator:
        if self.generator != "pcg64":
            raise ConfigurationError(
                f"unknown disturbance generator {self.generator!r}")
        return np.random.Generator(np.random.PCG64(self.seed))


def inject_disturbance(sample: RegressionSample, spec: DisturbanceSpec,
                       rng: np.random.Generator,
                       g_true: Optional[np.ndarray] = None) -> RegressionSample:
    """Perturb one sample's output; phi is left untouched (its noise enters
    through the d_theta' phi term)."""
    if spec.amplitude == 0.0:
        return sample
    p = sample.phi.shape[0]
    a = spec.amplitude
    d_y = rng.uniform(-a, a)
    d_theta = rng.uniform(-a, a, size=p)
    d = d_y + float(d_theta @ sample.phi)
    if g_true is not None:
        d_phi = rng.uniform(-a, a, size=len(g_true))
        d += float(d_phi @ g_true)
    return RegressionSample(time=sample.time, phi=sample.phi, y=sample.y + d)


@dataclass
class ScenarioConfig:
    scenario: str
    schema: int = 1
    theta: Optional[list] = None          # true parameters (regimes for example8)
    horizon: Optional[float] = None       # seconds (CT) or steps (DT)
    h: float = 1e-3                       # CT integrator step
    lam: float = 1.0                      # CT filter constant
    gains: Dict[str, float] = field(default_factory=dict)
    m_bound: Optional[float] = None       # CT gain bound; default 100 / f0
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    estimators: Optional[List[str]] = None
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIO_NAMES:
            raise ConfigurationError(
                f"unknown scenario {self.scenario!r}; expected one of {SCENARIO_NAMES}")
        if self.horizon is not None and self.horizon <= 0:
            raise ConfigurationError("horizon must be positive")
        if self.h <= 0:
            raise ConfigurationError("h must be positive")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be >= 1")


@dataclass
class TraceRecord:
    t: float
    theta_hat: Tuple[float, ...]
    theta_err: Tuple[float, ...]
    err_norm: float
    delta: float
    z: float
    F_norm: float
    V: float
    y: Optional[float] = None
    u: Optional[float] = None


@dataclass
class EstimatorRun:
    records: List[TraceRecord]
    failed: bool = False
    reason: Optional[str] = None


def _record(t, theta_hat, theta_true, gamma, delta, z, F_norm, y=None, u=None):
    err = np.asarray(theta_hat, dtype=float) - np.asarray(theta_true, dtype=float)
    err_norm = float(np.linalg.norm(err))
    return TraceRecord(
        t=float(t),
        theta_hat=tuple(float(v) for v in theta_hat),
        theta_err=tuple(float(v) for v in err),
        err_norm=err_norm,
        delta=float(delta),
        z=float(z),
        F_norm=float(F_norm),
        V=err_norm ** 2 / (2.0 * gamma),
        y=y,
        u=u,
    )


# --------------------------------------------------------------------------
# example5: CT second-order plant through first-order filters
# --------------------------------------------------------------------------

@dataclass
class FilterBank:
    """First-order filters 1/(s + lam) applied to x1, x2 and u.

    All filter states start at zero, which makes the constructed
    regression exact (no swapping transient): the filtered residual
    obeys r' = -lam r with r(0) = 0.
    """

    lam: float
    states: np.ndarray = field(default_factory=lambda: np.zeros(3))


def nlpre_map_example5() -> MonotoneMap:
    """Reduced two-parameter map (t1, t2) -> (t1, t2, t2 - t1)."""
    J = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 1.0]])
    return MonotoneMap(
        dim_theta=2,
        dim_g=3,
        eval=lambda th: np.array([th[0], th[1], th[1] - th[0]]),
        jacobian=lambda th: J,
        mixing=np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        rho=1.0,
        nu=math.sqrt(3.0),
    )


class CtScenario:
    """Plant + filter bank producing a grid-sampled (phi(t), y(t))."""

    def __init__(self, theta_true, lam, horizon, u_level=5.0):
        self.theta_true = np.asarray(theta_true, dtype=float)
        self.lam = float(lam)
        self.horizon = float(horizon)
        self.u_level = float(u_level)

    def _rhs(self, t, s):
        x1, x2, f1, f2, f3 = s
        t1, t2, t3 = self.theta_true
        u = self.u_level
        return np.array([
            x2,
            -t1 * x1 - t2 * x2 + t3 * u,
            x1 - self.lam * f1,
            x2 - self.lam * f2,
            u - self.lam * f3,
        ])

    def trajectory(self, h_grid: float, t_end: Optional[float] = None):
        """RK4-integrate plant + filters on a uniform grid.

        Returns (ts, phis, ys); phi = (-H[x1], -H[x2], H[u]) and
        y = x2 - lam H[x2].
        """
        t_end = self.horizon if t_end is None else t_end
        n = int(round(t_end / h_grid))
        ts = np.arange(n + 1) * h_grid
        states = np.empty((n + 1, 5))
        s = np.zeros(5)
        states[0] = s
        for i in range(n):
            t = ts[i]
            k1 = self._rhs(t, s)
            k2 = self._rhs(t + 0.5 * h_grid, s + 0.5 * h_grid * k1)
            k3 = self._rhs(t + 0.5 * h_grid, s + 0.5 * h_grid * k2)
            k4 = self._rhs(t + h_grid, s + h_grid * k3)
            s = s + (h_grid / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            states[i + 1] = s
        phis = np.column_stack([-states[:, 2], -states[:, 3], states[:, 4]])
        ys = states[:, 1] - self.lam * states[:, 3]
        return ts, phis, ys

    def make_sampler(self, h: float,
                     disturbance: Optional[DisturbanceSpec] = None,
                     g_true: Optional[np.ndarray] = None):
        """Sampler over a grid of resolution h/2 (RK4 stage points)."""
        grid = 0.5 * h
        ts, phis, ys = self.trajectory(grid, self.horizon + h)
        if disturbance is not None and disturbance.amplitude > 0.0:
            rng = disturbance.make_rng()
            g = self.theta_true if g_true is None else g_true
            for i in range(len(ys)):
                s = RegressionSample(time=ts[i], phi=phis[i], y=ys[i])
                ys[i] = inject_disturbance(s, disturbance, rng, g_true=g).y

        def sampler(t):
            i = int(round(t / grid))
            if not 0 <= i < len(ys) or abs(t - i * grid) > 1e-9 * max(1.0, t):
                raise ValueError(f"sampler queried off-grid time {t}")
            return phis[i], float(ys[i])

        return sampler


def build_example5_ct(config: ScenarioConfig) -> CtScenario:
    theta = config.theta if config.theta is not None else [2.0, 3.0, 1.0]
    horizon = config.horizon if config.horizon is not None else 10.0
    return CtScenario(theta_true=theta, lam=config.lam, horizon=horizon)


def example5_gains(config: ScenarioConfig) -> CtGains:
    g = dict(alpha=20.3, f0=4.0, beta0=0.07, gamma=700.0)
    g.update(config.gains)
    m_bound = config.m_bound if config.m_bound is not None else 100.0 / g["f0"]
    return CtGains(alpha=g["alpha"], f0=g["f0"], beta0=g["beta0"],
                   gamma=g["gamma"], m_bound=m_bound)


EXAMPLE5_ETA0 = np.array([0.1, 0.1, 0.1])


# --------------------------------------------------------------------------
# example4: DT first-order plant
# --------------------------------------------------------------------------

class DtScenario:
    """Pre-generated (phi_k, y_k) arrays for an open-loop DT regression."""

    def __init__(self, phis, ys, theta_true):
        self.phis = np.asarray(phis, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.theta_true = np.asarray(theta_true, dtype=float)

    def samples(self, disturbance: Optional[DisturbanceSpec] = None,
                g_true: Optional[np.ndarray] = None):
        rng = disturbance.make_rng() if disturbance is not None else None
        g = self.theta_true if g_true is None else g_true
        for k in range(len(self.ys)):
            s = RegressionSample(time=k, phi=self.phis[k], y=float(self.ys[k]))
            if rng is not None and disturbance.amplitude > 0.0:
                s = inject_disturbance(s, disturbance, rng, g_true=g)
            yield s


def build_example4_dt(config: ScenarioConfig) -> DtScenario:
    theta = config.theta if config.theta is not None else [0.4, 0.8]
    t1, t2 = float(theta[0]), float(theta[1])
    steps = int(config.horizon) if config.horizon is not None else 500
    ys = np.empty(steps)
    phis = np.empty((steps, 2))
    y_prev, u_prev = 0.0, 0.0          # quiescent start; u_k = 1 from k = 0
    for k in range(steps):
        phis[k] = (y_prev, u_prev)
        y_k = t1 * y_prev + t2 * u_prev
        ys[k] = y_k
        y_prev, u_prev = y_k, 1.0
    return DtScenario(phis=phis, ys=ys, theta_true=[t1, t2])


def example4_gains(config: ScenarioConfig) -> DtGains:
    g = dict(f0=0.14, beta=1.0, gamma=0.4)
    g.update(config.gains)
    return DtGains(f0=g["f0"], beta=g["beta"], gamma=g["gamma"])


EXAMPLE4_ETA0 = np.array([1.0, 1.0])
EXAMPLE4_THETA0 = np.array([0.0, 0.0])


# --------------------------------------------------------------------------
# example8: switched DT plant under adaptive pole placement
# --------------------------------------------------------------------------

DEFAULT_DESIRED_POLES = (
    math.exp(-1.0),
    complex(math.exp(-0.5) * math.cos(0.86), math.exp(-0.5) * math.sin(0.86)),
    complex(math.exp(-0.5) * math.cos(0.86), -math.exp(-0.5) * math.sin(0.86)),
)

EXAMPLE8_THETA_STAR = (
    np.array([0.5, -0.1, 1.0, -0.4]),
    np.array([-1.4, 0.3, 1.0, -1.3]),
)
EXAMPLE8_THETA0 = np.array([0.1, -0.3, 0.5, -0.05])

POLE_COND_LIMIT = 1e8
DC_GAIN_FLOOR = 1e-9


def pole_placement(theta_hat, desired_poles=DEFAULT_DESIRED_POLES):
    """Controller coefficients (c1..c4) matching the desired closed loop.

    The plant model is y_k = -a1 y_{k-1} - a2 y_{k-2} + b1 u_{k-1}
    + b2 u_{k-2} with (a1, a2, b1, b2) = theta_hat, the control law
    u_k = c1 y_k + c2 y_{k-1} + c3 u_{k-1} + c4 r_k.  c4 enforces unit DC
    gain.  Returns (c, ok); ok is False when the coefficient-matching
    system is ill-conditioned or the DC numerator vanishes (caller then
    uses u = 0).
    """
    a1, a2, b1, b2 = (float(v) for v in theta_hat)
    dpoly = np.poly(np.asarray(desired_poles, dtype=complex))
    if np.max(np.abs(dpoly.imag)) > 1e-9:
        raise ValueError("desired poles must be closed under conjugation")
    d1, d2, d3 = dpoly.real[1:]
    M = np.array([
        [b1, 0.0, 1.0],
        [b2, b1, a1],
        [0.0, b2, a2],
    ])
    rhs = np.array([a1 - d1, a2 - d2, -d3])
    dc_num = b1 + b2
    if abs(dc_num) < DC_GAIN_FLOOR or np.linalg.cond(M) > POLE_COND_LIMIT:
        return np.zeros(4), False
    c123 = np.linalg.solve(M, rhs)
    c4 = (1.0 + d1 + d2 + d3) / dc_num
    return np.array([c123[0], c123[1], c123[2], c4]), True


@dataclass
class Example8Scenario:
    theta_star: Tuple[np.ndarray, np.ndarray]
    switch_at: int
    steps: int
    desired_poles: tuple
    schedule: SwitchSchedule
    gains: DtGains
    theta0: np.ndarray

    def regime(self, k: int) -> int:
        return 0 if k < self.switch_at else 1


def build_example8_switched(config: ScenarioConfig) -> Example8Scenario:
    if config.theta is not None:
        theta_star = tuple(np.asarray(t, dtype=float) for t in config.theta)
    else:
        theta_star = EXAMPLE8_THETA_STAR
    steps = int(config.horizon) if config.horizon is not None else 300
    switch_at = 50
    g = dict(f0=0.4, beta=1.0, gamma=500.0)
    g.update(config.gains)
    gains = DtGains(f0=g["f0"], beta=g["beta"], gamma=g["gamma"])
    schedule = SwitchSchedule(
        reset_instants=[0, switch_at],
        regime_of=lambda k: 0 if k < switch_at else 1,
    )
    return Example8Scenario(theta_star=theta_star, switch_at=switch_at,
                            steps=steps, desired_poles=DEFAULT_DESIRED_POLES,
                            schedule=schedule, gains=gains,
                            theta0=EXAMPLE8_THETA0.copy())


def run_example8(scenario: Example8Scenario, record_every: int = 1) -> EstimatorRun:
    """Closed loop coupling the switched plant, the resetting estimator
    and the adaptive pole-placement controller (r_k = 1)."""
    gains = scenario.gains
    map4 = identity_map(4)
    state = SwitchedDtState.initial(np.zeros(4), scenario.theta0, gains.f0)
    y1, y2 = -0.2, 0.4       # y_{k-1}, y_{k-2}
    u1, u2 = 0.0, 0.0        # u_{k-1}, u_{k-2}
    records: List[TraceRecord] = []
    try:
        for k in range(scenario.steps):
            theta_true = scenario.theta_star[scenario.regime(k)]
            phi = np.array([-y1, -y2, u1, u2])
            y_k = float(phi @ theta_true)
            if not math.isfinite(y_k) or abs(y_k) > 1e12:
                return EstimatorRun(records=records, failed=True,
                                    reason=f"closed loop diverged at k={k}")
            sample = RegressionSample(time=k, phi=phi, y=y_k)
            mixed = switched_outputs(state, gains)
            state = switched_step(state, sample, gains, scenario.schedule, map4)
            c, ok = pole_placement(state.theta_hat, scenario.desired_poles)
            u_k = float(c[0] * y_k + c[1] * y1 + c[2] * u1 + c[3] * 1.0) if ok else 0.0
            if k % record_every == 0 or k == scenario.steps - 1:
                records.append(_record(
                    k, state.theta_hat, theta_true, gains.gamma, mixed.delta,
                    state.z, _core.sym_eigmax(state.F), y=y_k, u=u_k))
            y2, y1 = y1, y_k
            u2, u1 = u1, u_k
    except (CovarianceError, FloatingPointError, OverflowError,
            np.linalg.LinAlgError) as exc:
        return EstimatorRun(records=records, failed=True, reason=str(exc))
    if records and not np.isfinite(records[-1].err_norm):
        return EstimatorRun(records=records, failed=True, reason="divergence")
    return EstimatorRun(records=records)


# --------------------------------------------------------------------------
# runner
# --------------------------------------------------------------------------

DEFAULT_ESTIMATORS = {
    "example5": ["ct_lpre", "ct_nlpre", "gradient", "rls"],
    "example4": ["dt_lpre", "gradient", "rls"],
    "example8": ["dt_switched"],
}


def _run_ct_estimator(scenario: CtScenario, config: ScenarioConfig,
                      nlpre: bool) -> EstimatorRun:
    gains = example5_gains(config)
    h = config.h
    sampler = scenario.make_sampler(h, disturbance=config.disturbance)
    if nlpre:
        map_ = nlpre_map_example5()
        theta_true = scenario.theta_true[:2]
    else:
        map_ = identity_map(3)
        theta_true = scenario.theta_true
    state = CtEstimatorState.initial(EXAMPLE5_ETA0, np.zeros(map_.dim_theta),
                                     gains.f0)
    n = int(round(scenario.horizon / h))
    records: List[TraceRecord] = []
    try:
        for i in range(n):
            state = ct_step(state, sampler, gains, map_, h)
            if i % config.record_every == 0 or i == n - 1:
                mixed = ct_scalar_outputs(state, gains)
                records.append(_record(
                    state.t, state.theta_hat, theta_true, gains.gamma,
                    mixed.delta, state.z, _core.sym_eigmax(state.F)))
    except IntegrationBlowupError as exc:
        return EstimatorRun(records=records, failed=True, reason=str(exc))
    return EstimatorRun(records=records)


def _run_dt_estimator(scenario: DtScenario, config: ScenarioConfig) -> EstimatorRun:
    gains = example4_gains(config)
    map_ = identity_map(2)
    state = DtEstimatorState.initial(EXAMPLE4_ETA0, EXAMPLE4_THETA0, gains.f0)
    records: List[TraceRecord] = []
    try:
        for k, sample in enumerate(scenario.samples(config.disturbance)):
            mixed = dt_outputs(state, gains)
            state = dt_step(state, sample, gains, map_)
            if k % config.record_every == 0 or k == len(scenario.ys) - 1:
                records.append(_record(
                    k, state.theta_hat, scenario.theta_true, gains.gamma,
                    mixed.delta, state.z, _core.sym_eigmax(state.F),
                    y=float(sample.y)))
    except CovarianceError as exc:
        return EstimatorRun(records=records, failed=True, reason=str(exc))
    return EstimatorRun(records=records)


def _run_baseline(samples, theta_true, kind: str, record_every: int) -> EstimatorRun:
    theta_true = np.asarray(theta_true, dtype=float)
    q = theta_true.shape[0]
    if kind == "gradient":
        state = GradientState.initial(np.zeros(q))
    else:
        state = RlsState.initial(np.zeros(q), p0=100.0, lam=1.0)
    records: List[TraceRecord] = []
    samples = list(samples)
    for k, sample in enumerate(samples):
        if kind == "gradient":
            state = gradient_step_dt(state, sample)
            gain_norm = _core.sym_eigmax(state.Gamma)
        else:
            state = rls_step_dt(state, sample)
            gain_norm = _core.sym_eigmax(state.P)
        if k % record_every == 0 or k == len(samples) - 1:
            err = state.theta_hat - theta_true
            records.append(TraceRecord(
                t=float(sample.time),
                theta_hat=tuple(float(v) for v in state.theta_hat),
                theta_err=tuple(float(v) for v in err),
                err_norm=float(np.linalg.norm(err)),
                delta=0.0, z=1.0, F_norm=float(gain_norm),
                V=0.5 * float(err @ err)))
    return EstimatorRun(records=records)


def _ct_baseline_samples(scenario: CtScenario, config: ScenarioConfig):
    # baselines run on the CT scenario sampled at the integrator step
    ts, phis, ys = scenario.trajectory(config.h)
    if config.disturbance.amplitude > 0.0:
        rng = config.disturbance.make_rng()
        for i in range(len(ys)):
            s = RegressionSample(time=ts[i], phi=phis[i], y=ys[i])
            ys[i] = inject_disturbance(s, config.disturbance, rng,
                                       g_true=scenario.theta_true).y
    return [RegressionSample(time=ts[i], phi=phis[i], y=float(ys[i]))
            for i in range(len(ys))]


def run_scenario(config: ScenarioConfig) -> Dict[str, EstimatorRun]:
    """Run every selected estimator on the configured scenario.

    Deterministic: identical configs produce identical traces.
    """
    names = config.estimators
    if names is None:
        names = DEFAULT_ESTIMATORS[config.scenario]
    out: Dict[str, EstimatorRun] = {}
    if config.scenario == "example5":
        scenario = build_example5_ct(config)
        for name in names:
            if name == "ct_lpre":
                out[name] = _run_ct_estimator(scenario, config, nlpre=False)
            elif name == "ct_nlpre":
                out[name] = _run_ct_estimator(scenario, config, nlpre=True)
            elif name in ("gradient", "rls"):
                out[name] = _run_baseline(
                    _ct_baseline_samples(scenario, config),
                    scenario.theta_true, name, config.record_every)
            else:
                raise ConfigurationError(f"unknown estimator {name!r} for example5")
    elif config.scenario == "example4":
        scenario = build_example4_dt(config)
        for name in names:
            if name == "dt_lpre":
                out[name] = _run_dt_estimator(scenario, config)
            elif name in ("gradient", "rls"):
                out[name] = _run_baseline(
                    list(scenario.samples(config.disturbance)),
                    scenario.theta_true, name, config.record_every)
            else:
                raise ConfigurationError(f"unknown estimator {name!r} for example4")
    else:
        scenario = build_example8_switched(config)
        for name in names:
            if name == "dt_switched":
                out[name] = run_example8(scenario, config.record_every)
            else:
                raise ConfigurationError(f"unknown estimator {name!r} for example8")
    return out
