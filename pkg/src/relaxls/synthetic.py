"""Randomized regression problems for property suites and tests."""

import numpy as np

from .regression import MonotoneMap, RegressionSample, identity_map


def random_lpre_dt(rng: np.random.Generator, q: int, steps: int):
    """Random identifiable linear DT regression: (phis, ys, theta)."""
    theta = rng.uniform(-3.0, 3.0, size=q)
    phis = rng.normal(size=(steps, q))
    ys = phis @ theta
    return phis, ys, theta


def random_monotone_map(rng: np.random.Generator, q: int, p: int) -> MonotoneMap:
    """A strongly monotone map: g(t) = [t + eps*sin(t); B t], Q = [I 0].

    The top block keeps sym(Q dG) >= 2(1 - eps) I; nu is a valid global
    Lipschitz bound from the blockwise estimate.
    """
    assert p >= q
    eps = 0.3
    B = rng.uniform(-1.0, 1.0, size=(p - q, q))

    def g(theta):
        theta = np.asarray(theta, dtype=float)
        top = theta + eps * np.sin(theta)
        return np.concatenate([top, B @ theta]) if p > q else top

    def jac(theta):
        theta = np.asarray(theta, dtype=float)
        top = np.eye(q) + eps * np.diag(np.cos(theta))
        return np.vstack([top, B]) if p > q else top

    Q = np.hstack([np.eye(q), np.zeros((q, p - q))])
    bnorm = float(np.linalg.svd(B, compute_uv=False)[0]) if p > q else 0.0
    nu = float(np.hypot(1.0 + eps, bnorm)) + 1e-9
    return MonotoneMap(dim_theta=q, dim_g=p, eval=g, jacobian=jac,
                       mixing=Q, rho=2.0 * (1.0 - eps), nu=nu)


def random_nlpre_dt(rng: np.random.Generator, q: int, p: int, steps: int):
    """Random nonlinear DT regression: (phis, ys, map, theta)."""
    map_ = random_monotone_map(rng, q, p)
    theta = rng.uniform(-2.0, 2.0, size=q)
    g = map_.g(theta)
    phis = rng.normal(size=(steps, p))
    ys = phis @ g
    return phis, ys, map_, theta


def random_ct_lpre(rng: np.random.Generator, p: int, n_tones: int = 3):
    """Random smooth CT linear regression as an analytic sampler.

    Returns (sampler, theta); sampler(t) -> (phi(t), y(t)) is exact at any
    t, so integration error is the only error source in estimator runs.
    """
    theta = rng.uniform(-2.0, 2.0, size=p)
    amps = rng.uniform(0.3, 1.0, size=(p, n_tones))
    freqs = rng.uniform(0.3, 3.0, size=(p, n_tones))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(p, n_tones))

    def sampler(t):
        phi = np.sum(amps * np.cos(freqs * t + phases), axis=1)
        return phi, float(phi @ theta)

    return sampler, theta
