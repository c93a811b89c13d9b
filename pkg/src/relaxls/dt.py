"""Discrete-time normalized interlaced LS estimator.

Includes the nonlinear-parameterization variant with its adaptation-gain
margin, the linear specialization, and the resetting variant for known
switched parameters.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import _core
from .regression import (
    DimensionError,
    ConfigurationError,
    MonotoneMap,
    ScalarRegression,
    identity_map,
    mix,
)


class CovarianceError(RuntimeError):
    """The gain matrix lost positive definiteness (corrupted recursion)."""


@dataclass
class DtGains:
    f0: float
    beta: float
    gamma: float

    def __post_init__(self):
        if self.f0 <= 0:
            raise ValueError("f0 must be positive")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass
class DtEstimatorState:
    """Estimator state at index k.

    ``F`` holds the gain matrix consumed at step k (the "previous" matrix
    of the recursion), and ``z`` equals beta**k.
    """

    eta_hat: np.ndarray
    F: np.ndarray
    z: float
    theta_hat: np.ndarray
    k: int
    eta0: np.ndarray

    @classmethod
    def initial(cls, eta0, theta0, f0: float) -> "DtEstimatorState":
        eta0 = np.asarray(eta0, dtype=float)
        p = eta0.shape[0]
        return cls(eta_hat=eta0.copy(), F=np.eye(p) / f0, z=1.0,
                   theta_hat=np.asarray(theta0, dtype=float).copy(), k=0,
                   eta0=eta0.copy())


def dt_outputs(state: DtEstimatorState, gains: DtGains) -> ScalarRegression:
    """Mixed scalar regression from the pre-update gain matrix and z."""
    p = state.eta_hat.shape[0]
    zf0 = gains.f0 * state.z
    Phi = np.eye(p) - zf0 * state.F
    Y = state.eta_hat - zf0 * (state.F @ state.eta0)
    return mix(Y, Phi)


def _check_sample(state, sample):
    phi = np.asarray(sample.phi, dtype=float)
    if phi.shape != state.eta_hat.shape:
        raise DimensionError(
            f"regressor has shape {phi.shape}, state expects {state.eta_hat.shape}")
    if not (np.all(np.isfinite(phi)) and np.isfinite(sample.y)):
        raise ValueError("non-finite sample")
    return phi, float(sample.y)


def _checked_ls_update(eta, F, phi, y, beta):
    eta_new, F_new, m = _core.dt_ls_update(eta, F, phi, y, beta)
    if m <= 0.0:
        raise CovarianceError(f"normalization m = {m} <= 0: F lost definiteness")
    try:
        np.linalg.cholesky(F_new)
    except np.linalg.LinAlgError:
        raise CovarianceError("gain matrix update lost positive definiteness")
    return eta_new, F_new


def dt_step(state: DtEstimatorState, sample, gains: DtGains,
            map: MonotoneMap) -> DtEstimatorState:
    """One step of the normalized interlaced estimator.

    The parameter update uses the scalar pair computed from the
    pre-update gain matrix, normalized by delta / (1 + delta^2).
    """
    phi, y = _check_sample(state, sample)
    mixed = dt_outputs(state, gains)
    delta = mixed.delta
    resid = mixed.cal_y - delta * map.g(state.theta_hat)
    theta_new = state.theta_hat + gains.gamma * (delta / (1.0 + delta * delta)) * (
        map.mixing @ resid)
    eta_new, F_new = _checked_ls_update(state.eta_hat, state.F, phi, y, gains.beta)
    return DtEstimatorState(eta_hat=eta_new, F=F_new, z=gains.beta * state.z,
                            theta_hat=theta_new, k=state.k + 1, eta0=state.eta0)


def dt_linear_step(state: DtEstimatorState, sample, gains: DtGains) -> DtEstimatorState:
    """Linear-regression specialization (identity map, p = q)."""
    return dt_step(state, sample, gains, identity_map(state.eta_hat.shape[0]))


def sigma_margin(map: MonotoneMap, gamma: float) -> float:
    """Adaptation-gain margin; must be positive for the nonlinear variant."""
    lam = float(np.linalg.eigvalsh(map.mixing.T @ map.mixing)[-1])
    return map.rho - 0.5 * gamma * map.nu ** 2 * lam


# --------------------------------------------------------------------------
# switched-parameter resetting estimator
# --------------------------------------------------------------------------

@dataclass
class SwitchSchedule:
    """Known reset instants and the regime active at each step."""

    reset_instants: List[int]
    regime_of: Callable[[int], int]

    def __post_init__(self):
        inst = list(self.reset_instants)
        if any(b <= a for a, b in zip(inst, inst[1:])):
            raise ConfigurationError("reset instants must be strictly increasing")
        if inst and inst[0] < 0:
            raise ConfigurationError("reset instants must be non-negative")
        self.reset_instants = inst
        self._reset_set = frozenset(inst)

    def is_reset(self, k: int) -> bool:
        return k in self._reset_set

    def validate_dwell(self, k_c: int):
        """Check the minimum inter-reset dwell k_c (excitation window)."""
        for a, b in zip(self.reset_instants, self.reset_instants[1:]):
            if a + k_c > b:
                raise ConfigurationError(
                    f"reset instants {a} and {b} violate the dwell window {k_c}")


@dataclass
class SwitchedDtState(DtEstimatorState):
    """Adds psi, the eta_hat snapshot taken at the most recent reset."""

    psi: np.ndarray = None

    @classmethod
    def initial(cls, eta0, theta0, f0: float) -> "SwitchedDtState":
        base = DtEstimatorState.initial(eta0, theta0, f0)
        return cls(eta_hat=base.eta_hat, F=base.F, z=1.0,
                   theta_hat=base.theta_hat, k=0, eta0=base.eta0,
                   psi=base.eta0.copy())


def switched_outputs(state: SwitchedDtState, gains: DtGains) -> ScalarRegression:
    """Mixed pair of the resetting estimator; psi replaces the initial eta."""
    p = state.eta_hat.shape[0]
    Phi = np.eye(p) - gains.f0 * state.F
    Y = state.eta_hat - gains.f0 * (state.F @ state.psi)
    return mix(Y, Phi)


def switched_step(state: SwitchedDtState, sample, gains: DtGains,
                  schedule: SwitchSchedule, map: MonotoneMap) -> SwitchedDtState:
    """One step of the resetting estimator (unit forgetting between resets).

    At a reset instant the gain matrix returns to its initial value and
    psi snapshots the freshly updated eta_hat; otherwise the step is the
    plain unit-forgetting recursion.
    """
    if gains.beta != 1.0:
        raise ConfigurationError("the resetting estimator requires beta = 1")
    phi, y = _check_sample(state, sample)
    mixed = switched_outputs(state, gains)
    delta = mixed.delta
    resid = mixed.cal_y - delta * map.g(state.theta_hat)
    theta_new = state.theta_hat + gains.gamma * (delta / (1.0 + delta * delta)) * (
        map.mixing @ resid)
    eta_new, F_new = _checked_ls_update(state.eta_hat, state.F, phi, y, 1.0)
    if schedule.is_reset(state.k):
        F_new = np.eye(phi.shape[0]) / gains.f0
        psi_new = eta_new.copy()
    else:
        psi_new = state.psi
    return SwitchedDtState(eta_hat=eta_new, F=F_new, z=1.0,
                           theta_hat=theta_new, k=state.k + 1,
                           eta0=state.eta0, psi=psi_new)
