"""Classical comparison estimators: normalized gradient and RLS."""

from dataclasses import dataclass

import numpy as np

from .regression import DimensionError


@dataclass
class GradientState:
    theta_hat: np.ndarray
    Gamma: np.ndarray

    @classmethod
    def initial(cls, theta0, gain=1.0) -> "GradientState":
        theta0 = np.asarray(theta0, dtype=float)
        q = theta0.shape[0]
        Gamma = np.asarray(gain, dtype=float)
        if Gamma.ndim == 0:
            Gamma = float(Gamma) * np.eye(q)
        return cls(theta_hat=theta0.copy(), Gamma=Gamma)


def gradient_step_dt(state: GradientState, sample) -> GradientState:
    """Normalized gradient update theta += Gamma phi e / (1 + phi' Gamma phi)."""
    phi = np.asarray(sample.phi, dtype=float)
    if phi.shape != state.theta_hat.shape:
        raise DimensionError(
            f"regressor shape {phi.shape} != parameter shape {state.theta_hat.shape}")
    Gphi = state.Gamma @ phi
    err = float(sample.y) - float(phi @ state.theta_hat)
    theta_new = state.theta_hat + Gphi * err / (1.0 + float(phi @ Gphi))
    return GradientState(theta_hat=theta_new, Gamma=state.Gamma)


@dataclass
class RlsState:
    theta_hat: np.ndarray
    P: np.ndarray
    lam: float

    @classmethod
    def initial(cls, theta0, p0=100.0, lam=1.0) -> "RlsState":
        theta0 = np.asarray(theta0, dtype=float)
        if not 0.0 < lam <= 1.0:
            raise ValueError(f"forgetting factor must lie in (0, 1], got {lam}")
        return cls(theta_hat=theta0.copy(), P=p0 * np.eye(theta0.shape[0]), lam=lam)


def rls_step_dt(state: RlsState, sample) -> RlsState:
    """Standard RLS with forgetting; P updated via the matrix inversion lemma."""
    phi = np.asarray(sample.phi, dtype=float)
    if phi.shape != state.theta_hat.shape:
        raise DimensionError(
            f"regressor shape {phi.shape} != parameter shape {state.theta_hat.shape}")
    Pphi = state.P @ phi
    denom = state.lam + float(phi @ Pphi)
    k = Pphi / denom
    err = float(sample.y) - float(phi @ state.theta_hat)
    theta_new = state.theta_hat + k * err
    P_new = (state.P - np.outer(k, Pphi)) / state.lam
    P_new = 0.5 * (P_new + P_new.T)
    return RlsState(theta_hat=theta_new, P=P_new, lam=state.lam)
