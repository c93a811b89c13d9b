"""Regression-equation abstractions, regressor extension and mixing.

Holds the parameterization map with its monotonicity/Lipschitz
certificates, the Lion/Kreisselmeier regressor extensions, the
adjugate-based mixing step that produces scalar regressions, and the
excitation / identifiability checkers.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import _core


class DimensionError(ValueError):
    """Shapes of the supplied arrays are inconsistent."""


class ConfigurationError(ValueError):
    """Invalid filter or estimator configuration."""


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass
class MonotoneMap:
    """A (possibly nonlinear) parameterization g: R^q -> R^p.

    ``mixing`` is the q x p matrix whose product with the Jacobian has a
    symmetric part bounded below by ``rho`` (strong monotonicity), and
    ``nu`` is a global Lipschitz constant of the map.  When ``jacobian``
    is None a central finite-difference Jacobian is substituted.
    """

    dim_theta: int
    dim_g: int
    eval: Callable[[np.ndarray], np.ndarray]
    mixing: np.ndarray
    rho: float
    nu: float
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.dim_theta < 1 or self.dim_g < self.dim_theta:
            raise DimensionError(
                f"need p >= q >= 1, got q={self.dim_theta}, p={self.dim_g}")
        self.mixing = np.asarray(self.mixing, dtype=float)
        if self.mixing.shape != (self.dim_theta, self.dim_g):
            raise DimensionError(
                f"mixing matrix must be {self.dim_theta}x{self.dim_g}, "
                f"got {self.mixing.shape}")
        if self.rho <= 0 or self.nu <= 0:
            raise ConfigurationError("rho and nu must be positive")

    def g(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = np.asarray(self.eval(theta), dtype=float)
        if out.shape != (self.dim_g,):
            raise DimensionError(
                f"map value must have length {self.dim_g}, got {out.shape}")
        return out

    def jac(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.jacobian is not None:
            J = np.asarray(self.jacobian(theta), dtype=float)
        else:
            J = np.empty((self.dim_g, self.dim_theta))
            for i in range(self.dim_theta):
                step = 1e-6 * (1.0 + abs(theta[i]))
                hi = theta.copy()
                lo = theta.copy()
                hi[i] += step
                lo[i] -= step
                J[:, i] = (self.g(hi) - self.g(lo)) / (2.0 * step)
        if J.shape != (self.dim_g, self.dim_theta):
            raise DimensionError(
                f"Jacobian must be {self.dim_g}x{self.dim_theta}, got {J.shape}")
        return J


def identity_map(q: int) -> MonotoneMap:
    """The linear parameterization g(theta) = theta with unit mixing."""
    return MonotoneMap(
        dim_theta=q,
        dim_g=q,
        eval=lambda theta: np.asarray(theta, dtype=float),
        jacobian=lambda theta: np.eye(q),
        mixing=np.eye(q),
        rho=1.0,
        nu=1.0,
    )


@dataclass
class RegressionSample:
    time: float
    phi: np.ndarray
    y: float

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        if not np.all(np.isfinite(self.phi)) or not np.isfinite(self.y):
            raise ValueError("regression sample contains non-finite entries")


@dataclass
class ScalarRegression:
    """The mixed pair: cal_y = delta * g(theta) on consistent data."""

    delta: float
    cal_y: np.ndarray


@dataclass
class ExcitationReport:
    excited: bool
    level: float
    window_end: float


# --------------------------------------------------------------------------
# adjugate / mixing
# --------------------------------------------------------------------------

def _adj_det_exact(A):
    """Faddeev-LeVerrier in exact Fraction arithmetic (object arrays)."""
    p = len(A)
    A = [[Fraction(A[i][j]) for j in range(p)] for i in range(p)]
    ident = [[Fraction(int(i == j)) for j in range(p)] for i in range(p)]

    def matmul(X, Y):
        return [[sum(X[i][k] * Y[k][j] for k in range(p)) for j in range(p)]
                for i in range(p)]

    M = [row[:] for row in ident]
    c = -sum(A[i][i] for i in range(p))
    for k in range(2, p + 1):
        W = matmul(A, M)
        for i in range(p):
            W[i][i] += c
        M = W
        W = matmul(A, M)
        c = -sum(W[i][i] for i in range(p)) / k
    sign = -1 if p % 2 else 1
    det = sign * c
    adj = np.array([[-sign * M[i][j] for j in range(p)] for i in range(p)],
                   dtype=object)
    return adj, det


def adjugate(A):
    """Return (adj(A), det(A)) such that adj(A) @ A == det(A) * I.

    Float input goes through the compiled kernel; object input (e.g.
    Fractions or ints promoted to object dtype) is computed exactly.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"adjugate needs a square matrix, got {A.shape}")
    if A.dtype == object:
        return _adj_det_exact(A.tolist())
    adj, det = _core.adj_det(np.ascontiguousarray(A, dtype=float))
    return adj, det


def mix(Y, Phi) -> ScalarRegression:
    """Mixing step: multiply the extended regression by adj(Phi).

    For any g with Y = Phi @ g the result satisfies cal_y = delta * g.
    """
    Y = np.asarray(Y, dtype=float)
    Phi = np.asarray(Phi, dtype=float)
    if Phi.ndim != 2 or Phi.shape[0] != Phi.shape[1]:
        raise DimensionError(f"Phi must be square, got {Phi.shape}")
    if Y.shape != (Phi.shape[0],):
        raise DimensionError(
            f"Y has shape {Y.shape}, expected ({Phi.shape[0]},)")
    adj, det = adjugate(Phi)
    return ScalarRegression(delta=float(det), cal_y=adj @ Y)


# --------------------------------------------------------------------------
# regressor extensions (exact diagonal discretization, zero-order hold)
# --------------------------------------------------------------------------

@dataclass
class ExtensionState:
    """Filter state of a regressor extension: Y in R^p, Phi in R^{p x p}."""

    Y: np.ndarray
    Phi: np.ndarray

    @classmethod
    def zeros(cls, p: int) -> "ExtensionState":
        return cls(Y=np.zeros(p), Phi=np.zeros((p, p)))


def _diag_filter_step(state: ExtensionState, sample: RegressionSample,
                      a: np.ndarray, b: np.ndarray, h: float) -> ExtensionState:
    # dU/dt = -diag(a) U + b u, input held constant over [t, t+h]:
    # exact per-component update, so Y - Phi g is preserved by linearity.
    decay = np.exp(-a * h)
    gain = (1.0 - decay) / a
    Y = decay * state.Y + gain * b * sample.y
    Phi = decay[:, None] * state.Phi + np.outer(gain * b, sample.phi)
    return ExtensionState(Y=Y, Phi=Phi)


def _check_filter_poles(a, p):
    a = np.asarray(a, dtype=float)
    if a.shape != (p,):
        raise DimensionError(f"need {p} filter poles, got shape {a.shape}")
    if np.any(a <= 0):
        raise ConfigurationError("filter poles a_i must be positive")
    if len(np.unique(a)) != p:
        raise ConfigurationError("filter poles a_i must be pairwise distinct")
    return a


def lion_extension_step(state: ExtensionState, sample: RegressionSample,
                        a, b, h: float) -> ExtensionState:
    """Advance the Lion extension (constant input vector b) by one step."""
    p = sample.phi.shape[0]
    a = _check_filter_poles(a, p)
    b = np.asarray(b, dtype=float)
    if b.shape != (p,):
        raise DimensionError(f"need {p} input gains, got shape {b.shape}")
    if len(np.unique(b)) != p:
        raise ConfigurationError("input gains b_i must be pairwise distinct")
    if h <= 0:
        raise ConfigurationError("step size must be positive")
    return _diag_filter_step(state, sample, a, b, h)


def kreisselmeier_extension_step(state: ExtensionState, sample: RegressionSample,
                                 a, h: float) -> ExtensionState:
    """Advance the Kreisselmeier extension (b(t) = phi(t)) by one step."""
    a = _check_filter_poles(a, sample.phi.shape[0])
    if h <= 0:
        raise ConfigurationError("step size must be positive")
    return _diag_filter_step(state, sample, a, sample.phi, h)


def default_filter_poles(p: int):
    """Default a_i = i, b_i = 1/i; unspecified by theory, pure configuration."""
    idx = np.arange(1, p + 1, dtype=float)
    return idx, 1.0 / idx


# --------------------------------------------------------------------------
# assumption checkers
# --------------------------------------------------------------------------

def _sample_box(rng, box, q, n):
    lo, hi = box
    return rng.uniform(lo, hi, size=(n, q))


def check_monotonicity(map: MonotoneMap, n_samples: int = 200,
                       box=(-10.0, 10.0), seed: int = 0):
    """Sampled certificate of the monotonicity inequality.

    Returns (passed, worst_eig) with worst_eig the smallest eigenvalue of
    sym(Q J(theta)) * 2 observed over the sampled box.
    """
    if n_samples < 1:
        raise ConfigurationError("need at least one sample")
    rng = np.random.default_rng(seed)
    worst = np.inf
    for theta in _sample_box(rng, box, map.dim_theta, n_samples):
        QJ = map.mixing @ map.jac(theta)
        eig = float(np.linalg.eigvalsh(QJ + QJ.T)[0])
        worst = min(worst, eig)
    return worst >= map.rho - 1e-9, worst


def check_lipschitz(map: MonotoneMap, n_samples: int = 200,
                    box=(-10.0, 10.0), seed: int = 0):
    """Sampled certificate of |g(a) - g(b)| <= nu |a - b|."""
    if n_samples < 1:
        raise ConfigurationError("need at least one sample")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        a, b = _sample_box(rng, box, map.dim_theta, 2)
        d = float(np.linalg.norm(a - b))
        if d < 1e-12:
            continue
        ratio = float(np.linalg.norm(map.g(a) - map.g(b))) / d
        worst = max(worst, ratio)
    return worst <= map.nu + 1e-9, worst


def ie_check_dt(phis, k_c: int) -> ExcitationReport:
    """Interval-excitation check on a discrete regressor sequence.

    level is the smallest eigenvalue of sum_{j<=k_c} phi_j phi_j^T.
    """
    phis = np.asarray(phis, dtype=float)
    if phis.ndim != 2 or phis.shape[0] == 0:
        raise DimensionError("need a non-empty sequence of regressor vectors")
    if not 0 <= k_c < phis.shape[0]:
        raise DimensionError(f"k_c={k_c} outside sequence of length {phis.shape[0]}")
    window = phis[: k_c + 1]
    gram = window.T @ window
    level = float(np.linalg.eigvalsh(gram)[0])
    return ExcitationReport(excited=level > 0.0, level=level, window_end=k_c)


def ie_check_ct(phis, h: float, t_c: float) -> ExcitationReport:
    """Interval-excitation check on a sampled CT regressor trajectory.

    The Gram integral over [0, t_c] is approximated by the trapezoid rule
    on the grid with step h.
    """
    phis = np.asarray(phis, dtype=float)
    if phis.ndim != 2 or phis.shape[0] < 2:
        raise DimensionError("need at least two regressor samples")
    n = int(round(t_c / h))
    if n < 1 or n >= phis.shape[0]:
        raise DimensionError(
            f"t_c={t_c} outside the sampled span of {(phis.shape[0] - 1) * h}")
    window = phis[: n + 1]
    outer = window[:, :, None] * window[:, None, :]
    weights = np.full(n + 1, h)
    weights[0] = weights[-1] = 0.5 * h
    gram = np.tensordot(weights, outer, axes=1)
    level = float(np.linalg.eigvalsh(gram)[0])
    return ExcitationReport(excited=level > 0.0, level=level, window_end=t_c)


RANK_THRESHOLD = 1e-10


def identifiability_check(samples) -> bool:
    """True iff the stacked regressor samples have full numerical rank q.

    q is the common length of the sample vectors; rank uses the singular
    value cutoff sigma_i / sigma_1 > RANK_THRESHOLD.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise DimensionError("need a list of equally sized regressor vectors")
    q = samples.shape[1]
    if samples.shape[0] < q:
        return False
    sv = np.linalg.svd(samples, compute_uv=False)
    if sv[0] == 0.0:
        return False
    return int(np.sum(sv / sv[0] > RANK_THRESHOLD)) == q
