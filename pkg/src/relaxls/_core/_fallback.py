"""Pure-numpy implementations of the numerical hot kernels.

The compiled extension ``relaxls._core._speedups`` provides the same
functions with identical semantics; this module is the reference
implementation and the fallback when the extension is unavailable.
"""

import numpy as np


def adj_det(A):
    """Adjugate and determinant of a square matrix, computed jointly.

    Uses the Faddeev-LeVerrier recursion, which stays valid for singular
    matrices (adj(A) @ A == det(A) * I even when det(A) == 0).
    """
    A = np.asarray(A, dtype=np.float64)
    p = A.shape[0]
    if p == 0:
        return np.empty((0, 0)), 1.0
    eye = np.eye(p)
    M = eye.copy()              # M_1
    c = -np.trace(A)            # c_1
    for k in range(2, p + 1):
        M = A @ M + c * eye     # M_k
        c = -np.trace(A @ M) / k
    sign = -1.0 if p % 2 else 1.0
    det = sign * c
    adj = -sign * M
    return adj, float(det)


def sym_eigmax(F):
    """Largest eigenvalue of a symmetric matrix (its spectral norm when PSD)."""
    F = np.asarray(F, dtype=np.float64)
    Fs = 0.5 * (F + F.T)
    return float(np.linalg.eigvalsh(Fs)[-1])


def ct_rates(eta, F, z, phi, y, g_theta, eta0, alpha, f0, beta0, m_bound, gamma, Q):
    """One evaluation of the continuous-time interlaced-estimator vector field.

    Returns (deta, dF, dtheta, dz, delta).  The forgetting factor is
    beta0 * (1 - ||F|| / m_bound), floored at zero so roundoff drift in
    ||F|| near the bound cannot make it negative.
    """
    p = eta.shape[0]
    beta = beta0 * (1.0 - sym_eigmax(F) / m_bound)
    if beta < 0.0:
        beta = 0.0
    zf0 = z * f0
    Phi = np.eye(p) - zf0 * F
    adjPhi, delta = adj_det(Phi)
    cal_y = adjPhi @ (eta - zf0 * (F @ eta0))

    Fphi = F @ phi
    deta = (alpha * (y - phi @ eta)) * Fphi
    dF = -alpha * np.outer(Fphi, Fphi) + beta * F
    dz = -beta * z
    dtheta = (gamma * delta) * (Q @ (cal_y - delta * g_theta))
    return deta, dF, dtheta, dz, delta


def dt_ls_update(eta, F, phi, y, beta):
    """Normalized discrete-time LS update of (eta, F); returns (eta+, F+, m)."""
    Fphi = F @ phi
    m = beta + float(phi @ Fphi)
    eta_new = eta + (Fphi * (y - float(phi @ eta))) / m
    F_new = (F - np.outer(Fphi, Fphi) / m) / beta
    F_new = 0.5 * (F_new + F_new.T)
    return eta_new, F_new, m
