# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: adjugate/determinant, symmetric eigmax and the
per-stage estimator updates.  Semantics mirror ``_fallback`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, atan2, cos, sin

cnp.import_array()


cdef void _matmul(double[:, ::1] A, double[:, ::1] B, double[:, ::1] out, int p) noexcept nogil:
    cdef int i, j, k
    cdef double s
    for i in range(p):
        for j in range(p):
            s = 0.0
            for k in range(p):
                s += A[i, k] * B[k, j]
            out[i, j] = s


def adj_det(A):
    """Adjugate and determinant via the Faddeev-LeVerrier recursion."""
    cdef cnp.ndarray[double, ndim=2] Ac = np.ascontiguousarray(A, dtype=np.float64)
    cdef int p = Ac.shape[0]
    if p == 0:
        return np.empty((0, 0)), 1.0
    cdef cnp.ndarray[double, ndim=2] M = np.eye(p)
    cdef cnp.ndarray[double, ndim=2] W = np.empty((p, p))
    cdef double[:, ::1] Av = Ac, Mv = M, Wv = W
    cdef int i, j, k
    cdef double c = 0.0, tr
    for i in range(p):
        c -= Av[i, i]                       # c_1
    for k in range(2, p + 1):
        _matmul(Av, Mv, Wv, p)              # W = A @ M_{k-1}
        for i in range(p):
            Wv[i, i] += c
        for i in range(p):
            for j in range(p):
                Mv[i, j] = Wv[i, j]         # M_k
        _matmul(Av, Mv, Wv, p)
        tr = 0.0
        for i in range(p):
            tr += Wv[i, i]
        c = -tr / k
    cdef double sign = -1.0 if p % 2 else 1.0
    cdef double det = sign * c
    for i in range(p):
        for j in range(p):
            Mv[i, j] *= -sign
    return M, det


cdef double _sym_eigmax(double[:, ::1] S, int p) noexcept nogil:
    """Largest eigenvalue of symmetric S (destroyed), by cyclic Jacobi."""
    cdef int i, j, k, sweep
    cdef double off, theta, c, s, aij, aik, ajk, mx
    if p == 1:
        return S[0, 0]
    for sweep in range(64):
        off = 0.0
        for i in range(p):
            for j in range(i + 1, p):
                off += S[i, j] * S[i, j]
        if off < 1e-26:
            break
        for i in range(p):
            for j in range(i + 1, p):
                aij = S[i, j]
                if fabs(aij) < 1e-300:
                    continue
                theta = 0.5 * atan2(2.0 * aij, S[j, j] - S[i, i])
                c = cos(theta)
                s = sin(theta)
                for k in range(p):
                    aik = S[i, k]
                    ajk = S[j, k]
                    S[i, k] = c * aik - s * ajk
                    S[j, k] = s * aik + c * ajk
                for k in range(p):
                    aik = S[k, i]
                    ajk = S[k, j]
                    S[k, i] = c * aik - s * ajk
                    S[k, j] = s * aik + c * ajk
    mx = S[0, 0]
    for i in range(1, p):
        if S[i, i] > mx:
            mx = S[i, i]
    return mx


def sym_eigmax(F):
    cdef cnp.ndarray[double, ndim=2] Fc = np.ascontiguousarray(F, dtype=np.float64)
    cdef int p = Fc.shape[0]
    cdef cnp.ndarray[double, ndim=2] S = 0.5 * (Fc + Fc.T)
    return _sym_eigmax(S, p)


def ct_rates(eta, F, z, phi, y, g_theta, eta0, double alpha, double f0,
             double beta0, double m_bound, double gamma, Q):
    """Continuous-time vector field; see _fallback.ct_rates."""
    cdef cnp.ndarray[double, ndim=1] etac = np.ascontiguousarray(eta, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] Fc = np.ascontiguousarray(F, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] phic = np.ascontiguousarray(phi, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] gc = np.ascontiguousarray(g_theta, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] eta0c = np.ascontiguousarray(eta0, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] Qc = np.ascontiguousarray(Q, dtype=np.float64)
    cdef int p = etac.shape[0]
    cdef int q = Qc.shape[0]
    cdef double zc = z, yc = y

    cdef cnp.ndarray[double, ndim=2] S = 0.5 * (Fc + Fc.T)
    cdef double beta = beta0 * (1.0 - _sym_eigmax(S, p) / m_bound)
    if beta < 0.0:
        beta = 0.0

    cdef double zf0 = zc * f0
    cdef cnp.ndarray[double, ndim=2] Phi = np.eye(p) - zf0 * Fc
    adjPhi, delta = adj_det(Phi)
    cdef cnp.ndarray[double, ndim=2] adjc = adjPhi
    cdef double deltac = delta

    cdef cnp.ndarray[double, ndim=1] Fphi = np.empty(p)
    cdef cnp.ndarray[double, ndim=1] deta = np.empty(p)
    cdef cnp.ndarray[double, ndim=2] dF = np.empty((p, p))
    cdef cnp.ndarray[double, ndim=1] cal_y = np.empty(p)
    cdef cnp.ndarray[double, ndim=1] dtheta = np.empty(q)
    cdef double[:, ::1] Fv = Fc, dFv = dF, adjv = adjc, Qv = Qc
    cdef double[::1] phiv = phic, etav = etac, eta0v = eta0c, gv = gc
    cdef double[::1] Fphiv = Fphi, detav = deta, calyv = cal_y, dthetav = dtheta
    cdef int i, j
    cdef double s, err

    for i in range(p):
        s = 0.0
        for j in range(p):
            s += Fv[i, j] * phiv[j]
        Fphiv[i] = s
    err = yc
    for i in range(p):
        err -= phiv[i] * etav[i]
    for i in range(p):
        detav[i] = alpha * err * Fphiv[i]
        for j in range(p):
            dFv[i, j] = -alpha * Fphiv[i] * Fphiv[j] + beta * Fv[i, j]
    # cal_y = adj(Phi) @ (eta - z f0 F eta0); Fphi buffer is free by now
    for i in range(p):
        s = 0.0
        for j in range(p):
            s += Fv[i, j] * eta0v[j]
        Fphiv[i] = etav[i] - zf0 * s
    for i in range(p):
        s = 0.0
        for j in range(p):
            s += adjv[i, j] * Fphiv[j]
        calyv[i] = s
    for i in range(q):
        s = 0.0
        for j in range(p):
            s += Qv[i, j] * (calyv[j] - deltac * gv[j])
        dthetav[i] = gamma * deltac * s
    return deta, dF, dtheta, -beta * zc, deltac


def dt_ls_update(eta, F, phi, y, double beta):
    """Normalized discrete-time LS update; see _fallback.dt_ls_update."""
    cdef cnp.ndarray[double, ndim=1] etac = np.ascontiguousarray(eta, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] Fc = np.ascontiguousarray(F, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] phic = np.ascontiguousarray(phi, dtype=np.float64)
    cdef int p = etac.shape[0]
    cdef cnp.ndarray[double, ndim=1] Fphi = np.empty(p)
    cdef cnp.ndarray[double, ndim=1] eta_new = np.empty(p)
    cdef cnp.ndarray[double, ndim=2] F_new = np.empty((p, p))
    cdef double[:, ::1] Fv = Fc, Fnv = F_new
    cdef double[::1] phiv = phic, etav = etac, Fphiv = Fphi, env = eta_new
    cdef int i, j
    cdef double s, m, err, yc = y

    for i in range(p):
        s = 0.0
        for j in range(p):
            s += Fv[i, j] * phiv[j]
        Fphiv[i] = s
    m = beta
    err = yc
    for i in range(p):
        m += phiv[i] * Fphiv[i]
        err -= phiv[i] * etav[i]
    for i in range(p):
        env[i] = etav[i] + Fphiv[i] * err / m
        for j in range(p):
            Fnv[i, j] = (Fv[i, j] - Fphiv[i] * Fphiv[j] / m) / beta
    for i in range(p):
        for j in range(i + 1, p):
            s = 0.5 * (Fnv[i, j] + Fnv[j, i])
            Fnv[i, j] = s
            Fnv[j, i] = s
    return eta_new, F_new, m
