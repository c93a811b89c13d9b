"""Continuous-time interlaced LS estimator with bounded-gain forgetting.

The estimator runs a least-squares update on an auxiliary estimate of
g(theta) whose structure yields, at every instant, a square extended
regression; the mixing step turns it into scalar regressions that drive
the parameter update.  An equivalent dynamic-extension formulation and
the invertible coordinate change relating the two are also provided.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Tuple

import numpy as np

from . import _core
from .regression import (
    DimensionError,
    MonotoneMap,
    RegressionSample,
    ScalarRegression,
    identity_map,
    mix,
)

Z_FLOOR = 1e-300  # underflow guard for the forgetting integrator


class IntegrationBlowupError(RuntimeError):
    """The integrator produced non-finite state; carries the last valid state."""

    def __init__(self, last_state):
        super().__init__("integration produced non-finite state")
        self.last_state = last_state


@dataclass
class CtGains:
    alpha: float
    f0: float
    beta0: float
    gamma: float
    m_bound: float

    def __post_init__(self):
        if self.alpha <= 0 or self.f0 <= 0 or self.beta0 <= 0 or self.gamma <= 0:
            raise ValueError("alpha, f0, beta0 and gamma must be positive")
        if self.m_bound < 1.0 / self.f0:
            raise ValueError(
                f"gain bound {self.m_bound} must be at least 1/f0 = {1.0 / self.f0}")


@dataclass
class CtEstimatorState:
    eta_hat: np.ndarray
    F: np.ndarray
    z: float
    theta_hat: np.ndarray
    t: float
    eta0: np.ndarray   # stored initial eta_hat, consumed by the mixed output

    @classmethod
    def initial(cls, eta0, theta0, f0: float) -> "CtEstimatorState":
        eta0 = np.asarray(eta0, dtype=float)
        p = eta0.shape[0]
        return cls(
            eta_hat=eta0.copy(),
            F=np.eye(p) / f0,
            z=1.0,
            theta_hat=np.asarray(theta0, dtype=float).copy(),
            t=0.0,
            eta0=eta0.copy(),
        )


class CtDerivatives(NamedTuple):
    deta: np.ndarray
    dF: np.ndarray
    dtheta: np.ndarray
    dz: float
    delta: float


def ct_scalar_outputs(state: CtEstimatorState, gains: CtGains) -> ScalarRegression:
    """Mixed scalar regression (delta, cal_y) of the current state."""
    p = state.eta_hat.shape[0]
    zf0 = state.z * gains.f0
    Phi = np.eye(p) - zf0 * state.F
    Y = state.eta_hat - zf0 * (state.F @ state.eta0)
    return mix(Y, Phi)


def forgetting_factor(F, gains: CtGains) -> float:
    """Time-varying forgetting factor beta0 (1 - ||F|| / M), floored at 0."""
    beta = gains.beta0 * (1.0 - _core.sym_eigmax(F) / gains.m_bound)
    return max(beta, 0.0)


def ct_derivatives(state: CtEstimatorState, sample, gains: CtGains,
                   map: MonotoneMap) -> CtDerivatives:
    """Vector field of the interlaced estimator at the sample's instant."""
    phi = np.asarray(sample.phi, dtype=float)
    if phi.shape != state.eta_hat.shape:
        raise DimensionError(
            f"regressor has shape {phi.shape}, state expects {state.eta_hat.shape}")
    if not (np.all(np.isfinite(phi)) and np.isfinite(sample.y)):
        raise ValueError("non-finite sample")
    g = map.g(state.theta_hat)
    deta, dF, dtheta, dz, delta = _core.ct_rates(
        state.eta_hat, state.F, state.z, phi, float(sample.y), g, state.eta0,
        gains.alpha, gains.f0, gains.beta0, gains.m_bound, gains.gamma,
        map.mixing)
    return CtDerivatives(deta, dF, dtheta, float(dz), float(delta))


def _rates_at(eta, F, z, theta, state, phi, y, gains, map):
    g = map.g(theta)
    return _core.ct_rates(eta, F, z, phi, y, g, state.eta0,
                          gains.alpha, gains.f0, gains.beta0, gains.m_bound,
                          gains.gamma, map.mixing)


def ct_step(state: CtEstimatorState, sampler: Callable[[float], Tuple[np.ndarray, float]],
            gains: CtGains, map: MonotoneMap, h: float) -> CtEstimatorState:
    """One classical RK4 step of the estimator dynamics.

    ``sampler(t)`` must return (phi(t), y(t)); it is evaluated at the two
    endpoints and the midpoint.  F is re-symmetrized and z clipped to
    (0, 1] after the step.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    t = state.t
    phi0, y0 = sampler(t)
    phim, ym = sampler(t + 0.5 * h)
    phi1, y1 = sampler(t + h)

    eta, F, z, theta = state.eta_hat, state.F, state.z, state.theta_hat

    k1 = _rates_at(eta, F, z, theta, state, phi0, y0, gains, map)
    k2 = _rates_at(eta + 0.5 * h * k1[0], F + 0.5 * h * k1[1],
                   z + 0.5 * h * k1[3], theta + 0.5 * h * k1[2],
                   state, phim, ym, gains, map)
    k3 = _rates_at(eta + 0.5 * h * k2[0], F + 0.5 * h * k2[1],
                   z + 0.5 * h * k2[3], theta + 0.5 * h * k2[2],
                   state, phim, ym, gains, map)
    k4 = _rates_at(eta + h * k3[0], F + h * k3[1],
                   z + h * k3[3], theta + h * k3[2],
                   state, phi1, y1, gains, map)

    w = h / 6.0
    eta_new = eta + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    F_new = F + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    theta_new = theta + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    z_new = z + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])

    F_new = 0.5 * (F_new + F_new.T)
    z_new = min(max(z_new, Z_FLOOR), 1.0)
    new_state = CtEstimatorState(eta_hat=eta_new, F=F_new, z=z_new,
                                 theta_hat=theta_new, t=t + h, eta0=state.eta0)
    if not (np.all(np.isfinite(eta_new)) and np.all(np.isfinite(F_new))
            and np.all(np.isfinite(theta_new)) and np.isfinite(z_new)):
        raise IntegrationBlowupError(state)
    return new_state


def ct_linear_step(state: CtEstimatorState, sampler, gains: CtGains,
                   h: float) -> CtEstimatorState:
    """RK4 step of the linear-regression specialization (identity map)."""
    return ct_step(state, sampler, gains, identity_map(state.eta_hat.shape[0]), h)


# --------------------------------------------------------------------------
# alternative dynamic-extension formulation and the coordinate change
# --------------------------------------------------------------------------

@dataclass
class ExtensionState:
    Y: np.ndarray
    Phi: np.ndarray
    F: np.ndarray
    z: float
    theta_hat: np.ndarray
    t: float

    @classmethod
    def initial(cls, p: int, theta0, f0: float) -> "ExtensionState":
        return cls(Y=np.zeros(p), Phi=np.zeros((p, p)), F=np.eye(p) / f0,
                   z=1.0, theta_hat=np.asarray(theta0, dtype=float).copy(), t=0.0)


def extension_derivatives(state: ExtensionState, sample, gains: CtGains,
                          map: MonotoneMap):
    """Vector field of the dynamic-extension formulation.

    dY = -alpha F phi phi^T Y + alpha F phi y, dPhi likewise with phi^T in
    place of y; F and z follow the same dynamics as the main estimator,
    and theta_hat is driven by the mixed pair (det Phi, adj(Phi) Y).
    """
    phi = np.asarray(sample.phi, dtype=float)
    y = float(sample.y)
    beta = forgetting_factor(state.F, gains)
    Fphi = state.F @ phi
    dY = -Fphi * (gains.alpha * (phi @ state.Y)) + gains.alpha * Fphi * y
    dPhi = gains.alpha * np.outer(Fphi, phi - state.Phi.T @ phi)
    dF = -gains.alpha * np.outer(Fphi, Fphi) + beta * state.F
    dz = -beta * state.z
    mixed = mix(state.Y, state.Phi)
    resid = mixed.cal_y - mixed.delta * map.g(state.theta_hat)
    dtheta = gains.gamma * mixed.delta * (map.mixing @ resid)
    return dY, dPhi, dF, dtheta, dz


def extension_step(state: ExtensionState, sampler, gains: CtGains,
                   map: MonotoneMap, h: float) -> ExtensionState:
    """RK4 step of the dynamic-extension formulation."""
    t = state.t
    stages = [sampler(t), sampler(t + 0.5 * h), sampler(t + 0.5 * h), sampler(t + h)]
    offsets = [0.0, 0.5, 0.5, 1.0]

    def rates(Y, Phi, F, theta, z, phi_y):
        s = ExtensionState(Y=Y, Phi=Phi, F=F, z=z, theta_hat=theta, t=0.0)
        sample = RegressionSample(time=0.0, phi=phi_y[0], y=float(phi_y[1]))
        return extension_derivatives(s, sample, gains, map)

    ks = []
    for i, (off, phi_y) in enumerate(zip(offsets, stages)):
        if i == 0:
            k = rates(state.Y, state.Phi, state.F, state.theta_hat, state.z, phi_y)
        else:
            prev = ks[-1]
            k = rates(state.Y + off * h * prev[0], state.Phi + off * h * prev[1],
                      state.F + off * h * prev[2],
                      state.theta_hat + off * h * prev[3],
                      state.z + off * h * prev[4], phi_y)
        ks.append(k)
    w = h / 6.0
    parts = (state.Y, state.Phi, state.F, state.theta_hat, state.z)
    Y, Phi, F, theta, z = (
        parts[j] + w * (ks[0][j] + 2 * ks[1][j] + 2 * ks[2][j] + ks[3][j])
        for j in range(5))
    F = 0.5 * (F + F.T)
    z = min(max(z, Z_FLOOR), 1.0)
    return ExtensionState(Y=Y, Phi=Phi, F=F, z=z, theta_hat=theta, t=t + h)


def to_extension_coords(eta_hat, F, z, eta0, f0):
    """Forward coordinate change: (eta_hat, F, z) -> (Y, Phi)."""
    if z <= 0:
        raise ValueError("z must be positive")
    p = len(eta_hat)
    zf0 = z * f0
    Phi = np.eye(p) - zf0 * F
    Y = eta_hat - zf0 * (F @ np.asarray(eta0, dtype=float))
    return Y, Phi


def from_extension_coords(Y, Phi, z, eta0, f0):
    """Inverse coordinate change: (Y, Phi, z) -> (eta_hat, F)."""
    if z <= 0:
        raise ValueError("z must be positive")
    p = len(Y)
    eye_minus = np.eye(p) - np.asarray(Phi, dtype=float)
    eta_hat = np.asarray(Y, dtype=float) + eye_minus @ np.asarray(eta0, dtype=float)
    F = eye_minus / (z * f0)
    return eta_hat, F
