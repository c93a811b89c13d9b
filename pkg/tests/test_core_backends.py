"""Compiled and fallback kernel backends must agree bit-for-bit closely."""

import subprocess
import sys

import numpy as np
import pytest

from relaxls import _core

HAVE_SPEEDUPS = "speedups" in _core.available_backends()

needs_speedups = pytest.mark.skipif(
    not HAVE_SPEEDUPS, reason="compiled extension not built")


def _random_problem(rng, p):
    A = rng.normal(size=(p, p))
    F = A @ A.T + 0.1 * np.eye(p)
    phi = rng.normal(size=p)
    eta = rng.normal(size=p)
    return F, phi, eta


def test_backend_registry():
    assert "fallback" in _core.available_backends()
    assert _core.backend_name() in _core.available_backends()
    with pytest.raises(KeyError):
        _core.get_backend("no-such-backend")


def test_use_backend_roundtrip():
    original = _core.backend_name()
    prev = _core.use_backend("fallback")
    try:
        assert prev == original
        assert _core.backend_name() == "fallback"
    finally:
        _core.use_backend(original)


def test_env_override_forces_fallback():
    code = ("import relaxls._core as c; print(c.backend_name())")
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True, text=True,
        env={"RELAXLS_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"})
    assert out.stdout.strip() == "fallback"


@needs_speedups
def test_adj_det_backends_agree():
    fb = _core.get_backend("fallback")
    sp = _core.get_backend("speedups")
    rng = np.random.default_rng(0)
    for p in range(1, 6):
        for _ in range(20):
            A = rng.normal(size=(p, p))
            adj_f, det_f = fb.adj_det(A)
            adj_s, det_s = sp.adj_det(A)
            assert det_s == pytest.approx(det_f, rel=1e-13, abs=1e-13)
            np.testing.assert_allclose(adj_s, adj_f, rtol=1e-12, atol=1e-13)


@needs_speedups
def test_sym_eigmax_backends_agree():
    fb = _core.get_backend("fallback")
    sp = _core.get_backend("speedups")
    rng = np.random.default_rng(1)
    for p in range(1, 6):
        for _ in range(20):
            F, _, _ = _random_problem(rng, p)
            ref = float(np.linalg.eigvalsh(F)[-1])
            assert fb.sym_eigmax(F) == pytest.approx(ref, rel=1e-10)
            assert sp.sym_eigmax(F) == pytest.approx(ref, rel=1e-10)


@needs_speedups
def test_ct_rates_backends_agree():
    fb = _core.get_backend("fallback")
    sp = _core.get_backend("speedups")
    rng = np.random.default_rng(2)
    for p in range(1, 5):
        F, phi, eta = _random_problem(rng, p)
        eta0 = rng.normal(size=p)
        g = rng.normal(size=p)
        Q = np.eye(p)
        args = (eta, F, 0.7, phi, 1.3, g, eta0, 2.0, 1.5, 0.1, 50.0, 3.0, Q)
        out_f = fb.ct_rates(*args)
        out_s = sp.ct_rates(*args)
        for a, b in zip(out_f, out_s):
            np.testing.assert_allclose(np.asarray(b), np.asarray(a),
                                       rtol=1e-12, atol=1e-13)


@needs_speedups
def test_dt_ls_update_backends_agree():
    fb = _core.get_backend("fallback")
    sp = _core.get_backend("speedups")
    rng = np.random.default_rng(3)
    for p in range(1, 5):
        F, phi, eta = _random_problem(rng, p)
        out_f = fb.dt_ls_update(eta, F, phi, 0.9, 0.95)
        out_s = sp.dt_ls_update(eta, F, phi, 0.9, 0.95)
        for a, b in zip(out_f, out_s):
            np.testing.assert_allclose(np.asarray(b), np.asarray(a),
                                       rtol=1e-12, atol=1e-14)


def test_fallback_adj_det_identity():
    fb = _core.get_backend("fallback")
    rng = np.random.default_rng(4)
    for p in range(1, 6):
        A = rng.normal(size=(p, p))
        adj, det = fb.adj_det(A)
        np.testing.assert_allclose(adj @ A, det * np.eye(p),
                                   atol=1e-10 * max(1.0, abs(det)))
