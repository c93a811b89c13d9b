"""Discrete-time interlaced estimator and the resetting variant."""

import numpy as np
import pytest

from relaxls.dt import (
    CovarianceError,
    DtEstimatorState,
    DtGains,
    SwitchSchedule,
    SwitchedDtState,
    dt_linear_step,
    dt_outputs,
    dt_step,
    sigma_margin,
    switched_outputs,
    switched_step,
)
from relaxls.regression import (
    ConfigurationError,
    RegressionSample,
    identity_map,
    ie_check_dt,
)
from relaxls.synthetic import random_lpre_dt, random_nlpre_dt


def _sample(k, phi, y):
    return RegressionSample(time=k, phi=phi, y=float(y))


def test_gains_validation():
    with pytest.raises(ValueError):
        DtGains(f0=0.0, beta=1.0, gamma=1.0)
    with pytest.raises(ValueError):
        DtGains(f0=1.0, beta=0.0, gamma=1.0)
    with pytest.raises(ValueError):
        DtGains(f0=1.0, beta=1.1, gamma=1.0)
    with pytest.raises(ValueError):
        DtGains(f0=1.0, beta=1.0, gamma=0.0)


def test_one_step_hand_example():
    # p=q=1, beta=1, f0=1, phi=1, y=1, eta0=0: m=2, eta1=1/2, F0=1/2
    gains = DtGains(f0=1.0, beta=1.0, gamma=1.0)
    state = DtEstimatorState.initial([0.0], [0.0], gains.f0)
    state = dt_linear_step(state, _sample(0, [1.0], 1.0), gains)
    assert state.eta_hat[0] == pytest.approx(0.5)
    assert state.F[0, 0] == pytest.approx(0.5)
    assert state.k == 1


def test_zero_regressor_step():
    gains = DtGains(f0=1.0, beta=0.5, gamma=1.0)
    state = DtEstimatorState.initial([1.0, 2.0], [0.0, 0.0], gains.f0)
    new = dt_linear_step(state, _sample(0, [0.0, 0.0], 0.0), gains)
    np.testing.assert_allclose(new.eta_hat, state.eta_hat)
    np.testing.assert_allclose(new.F, state.F / gains.beta)


def test_initial_outputs_vanish():
    gains = DtGains(f0=0.14, beta=1.0, gamma=0.4)
    state = DtEstimatorState.initial([1.0, 1.0], [0.0, 0.0], gains.f0)
    mixed = dt_outputs(state, gains)
    assert mixed.delta == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(mixed.cal_y, 0.0, atol=1e-15)


def test_z_tracks_beta_power():
    gains = DtGains(f0=1.0, beta=0.9, gamma=0.2)
    state = DtEstimatorState.initial([0.0], [0.0], gains.f0)
    rng = np.random.default_rng(0)
    for k in range(10):
        assert state.z == pytest.approx(gains.beta ** k)
        state = dt_linear_step(state, _sample(k, [rng.normal()], rng.normal()),
                               gains)


def test_master_identity_every_step():
    # (I - f0 z F) g(theta) = eta_hat - f0 z F eta0 on consistent data
    rng = np.random.default_rng(1)
    for _ in range(20):
        q = int(rng.integers(1, 4))
        p = q + int(rng.integers(0, 3))
        phis, ys, map_, theta = random_nlpre_dt(rng, q, p, 60)
        g_true = map_.g(theta)
        gains = DtGains(f0=float(rng.uniform(0.2, 3.0)),
                        beta=float(rng.uniform(0.85, 1.0)), gamma=0.2)
        eta0 = rng.normal(size=p)
        state = DtEstimatorState.initial(eta0, np.zeros(q), gains.f0)
        for k in range(len(ys)):
            zf0 = gains.f0 * state.z
            lhs = (np.eye(p) - zf0 * state.F) @ g_true
            rhs = state.eta_hat - zf0 * (state.F @ state.eta0)
            assert float(np.max(np.abs(lhs - rhs))) < 1e-10
            state = dt_step(state, _sample(k, phis[k], ys[k]), gains, map_)


def test_inverse_recursion_identity():
    # F_k^-1 = beta F_{k-1}^-1 + phi phi^T, relative tolerance 1e-10
    rng = np.random.default_rng(2)
    phis, ys, theta = random_lpre_dt(rng, 3, 60)
    gains = DtGains(f0=0.5, beta=0.93, gamma=0.2)
    state = DtEstimatorState.initial(np.zeros(3), np.zeros(3), gains.f0)
    for k in range(len(ys)):
        prev_inv = np.linalg.inv(state.F)
        new = dt_linear_step(state, _sample(k, phis[k], ys[k]), gains)
        expect = gains.beta * prev_inv + np.outer(phis[k], phis[k])
        got = np.linalg.inv(new.F)
        assert float(np.max(np.abs(got - expect))) <= \
            1e-10 * max(1.0, float(np.max(np.abs(expect))))
        state = new


def test_fundamental_ls_property():
    # F_k^-1 (eta_{k+1} - theta) = beta F_{k-1}^-1 (eta_k - theta)
    rng = np.random.default_rng(3)
    phis, ys, theta = random_lpre_dt(rng, 3, 50)
    gains = DtGains(f0=1.0, beta=0.9, gamma=0.2)
    state = DtEstimatorState.initial(np.ones(3), np.zeros(3), gains.f0)
    for k in range(len(ys)):
        before = gains.beta * np.linalg.solve(state.F, state.eta_hat - theta)
        state = dt_linear_step(state, _sample(k, phis[k], ys[k]), gains)
        after = np.linalg.solve(state.F, state.eta_hat - theta)
        assert float(np.max(np.abs(after - before))) < 1e-8


def test_equilibrium():
    rng = np.random.default_rng(4)
    phis, ys, theta = random_lpre_dt(rng, 2, 30)
    gains = DtGains(f0=1.0, beta=1.0, gamma=0.5)
    state = DtEstimatorState.initial(theta.copy(), theta.copy(), gains.f0)
    for k in range(len(ys)):
        state = dt_linear_step(state, _sample(k, phis[k], ys[k]), gains)
        np.testing.assert_allclose(state.theta_hat, theta, atol=1e-12)


def test_componentwise_monotonicity():
    rng = np.random.default_rng(5)
    for _ in range(100):
        q = int(rng.integers(1, 6))
        phis, ys, theta = random_lpre_dt(rng, q, 60)
        gains = DtGains(f0=1.0, beta=1.0,
                        gamma=float(rng.uniform(0.05, 1.0)))
        state = DtEstimatorState.initial(np.zeros(q), np.zeros(q), gains.f0)
        prev = np.abs(state.theta_hat - theta)
        for k in range(len(ys)):
            state = dt_linear_step(state, _sample(k, phis[k], ys[k]), gains)
            cur = np.abs(state.theta_hat - theta)
            assert np.all(cur <= prev + 1e-12)
            prev = cur


def test_normalized_delta_bounded():
    rng = np.random.default_rng(6)
    phis, ys, theta = random_lpre_dt(rng, 3, 80)
    gains = DtGains(f0=0.3, beta=1.0, gamma=0.3)
    state = DtEstimatorState.initial(np.zeros(3), np.zeros(3), gains.f0)
    for k in range(len(ys)):
        d = dt_outputs(state, gains).delta
        assert d * d / (1.0 + d * d) <= 1.0
        state = dt_linear_step(state, _sample(k, phis[k], ys[k]), gains)


def test_delta_grows_toward_one():
    rng = np.random.default_rng(7)
    phis, ys, theta = random_lpre_dt(rng, 2, 200)
    gains = DtGains(f0=1.0, beta=1.0, gamma=0.3)
    state = DtEstimatorState.initial(np.zeros(2), np.zeros(2), gains.f0)
    deltas = []
    for k in range(len(ys)):
        deltas.append(dt_outputs(state, gains).delta)
        state = dt_linear_step(state, _sample(k, phis[k], ys[k]), gains)
    assert all(b >= a - 1e-12 for a, b in zip(deltas, deltas[1:]))
    assert deltas[-1] > 0.9


def test_delta_nonzero_after_ie():
    rng = np.random.default_rng(8)
    for _ in range(50):
        q = int(rng.integers(1, 5))
        phis, ys, theta = random_lpre_dt(rng, q, 40)
        k_c = q + int(rng.integers(0, 5))
        if not ie_check_dt(phis, k_c).excited:
            continue
        gains = DtGains(f0=1.0, beta=1.0, gamma=0.3)
        state = DtEstimatorState.initial(np.zeros(q), np.zeros(q), gains.f0)
        for k in range(len(ys)):
            if k > k_c:
                assert dt_outputs(state, gains).delta != 0.0
            state = dt_linear_step(state, _sample(k, phis[k], ys[k]), gains)


def test_nlpre_lyapunov_decrease():
    rng = np.random.default_rng(9)
    for _ in range(10):
        q = int(rng.integers(1, 4))
        p = q + int(rng.integers(0, 2))
        phis, ys, map_, theta = random_nlpre_dt(rng, q, p, 80)
        gamma = 0.9 * 2.0 * map_.rho / (
            map_.nu ** 2 * float(np.linalg.eigvalsh(map_.mixing @ map_.mixing.T)[-1]))
        assert sigma_margin(map_, gamma) > 0
        gains = DtGains(f0=1.0, beta=1.0, gamma=gamma)
        state = DtEstimatorState.initial(np.zeros(p), np.zeros(q), gains.f0)
        prev = float(np.sum((state.theta_hat - theta) ** 2))
        for k in range(len(ys)):
            state = dt_step(state, _sample(k, phis[k], ys[k]), gains, map_)
            cur = float(np.sum((state.theta_hat - theta) ** 2))
            assert cur <= prev + 1e-12
            prev = cur


def test_sigma_margin_values():
    assert sigma_margin(identity_map(2), 1.0) == pytest.approx(0.5)
    assert sigma_margin(identity_map(2), 1e-9) == pytest.approx(1.0, abs=1e-8)
    from relaxls.scenarios import nlpre_map_example5

    m = nlpre_map_example5()
    assert sigma_margin(m, 2.0 / 3.0) == pytest.approx(0.0, abs=1e-12)


def test_covariance_error_on_corruption():
    gains = DtGains(f0=1.0, beta=1.0, gamma=1.0)
    state = DtEstimatorState.initial([0.0], [0.0], gains.f0)
    state.F = np.array([[-1.0]])     # corrupted: not positive definite
    with pytest.raises(CovarianceError):
        dt_linear_step(state, _sample(0, [1.0], 1.0), gains)


# --------------------------------------------------------------------------
# resetting estimator
# --------------------------------------------------------------------------

def test_schedule_validation():
    with pytest.raises(ConfigurationError):
        SwitchSchedule(reset_instants=[5, 5], regime_of=lambda k: 0)
    with pytest.raises(ConfigurationError):
        SwitchSchedule(reset_instants=[-1], regime_of=lambda k: 0)
    sched = SwitchSchedule(reset_instants=[0, 50], regime_of=lambda k: 0)
    assert sched.is_reset(0) and sched.is_reset(50) and not sched.is_reset(3)
    sched.validate_dwell(50)
    with pytest.raises(ConfigurationError):
        sched.validate_dwell(51)


def test_switched_requires_unit_beta():
    gains = DtGains(f0=1.0, beta=0.9, gamma=1.0)
    state = SwitchedDtState.initial([0.0], [0.0], gains.f0)
    sched = SwitchSchedule(reset_instants=[], regime_of=lambda k: 0)
    with pytest.raises(ConfigurationError):
        switched_step(state, _sample(0, [1.0], 1.0), gains, sched,
                      identity_map(1))


def test_switched_no_resets_matches_plain():
    rng = np.random.default_rng(10)
    phis, ys, theta = random_lpre_dt(rng, 3, 40)
    gains = DtGains(f0=0.7, beta=1.0, gamma=0.4)
    sched = SwitchSchedule(reset_instants=[], regime_of=lambda k: 0)
    m = identity_map(3)
    a = DtEstimatorState.initial(np.zeros(3), np.zeros(3), gains.f0)
    b = SwitchedDtState.initial(np.zeros(3), np.zeros(3), gains.f0)
    for k in range(len(ys)):
        a = dt_step(a, _sample(k, phis[k], ys[k]), gains, m)
        b = switched_step(b, _sample(k, phis[k], ys[k]), gains, sched, m)
        np.testing.assert_allclose(b.theta_hat, a.theta_hat, atol=1e-13)
        np.testing.assert_allclose(b.eta_hat, a.eta_hat, atol=1e-13)
        np.testing.assert_allclose(b.F, a.F, atol=1e-13)


def test_reset_zeroes_delta_and_snapshots_psi():
    gains = DtGains(f0=0.4, beta=1.0, gamma=1.0)
    sched = SwitchSchedule(reset_instants=[3], regime_of=lambda k: 0)
    rng = np.random.default_rng(11)
    state = SwitchedDtState.initial(np.zeros(2), np.zeros(2), gains.f0)
    m = identity_map(2)
    for k in range(6):
        state = switched_step(
            state, _sample(k, rng.normal(size=2), rng.normal()), gains, sched, m)
        if k == 3:
            np.testing.assert_allclose(state.F, np.eye(2) / gains.f0)
            np.testing.assert_allclose(state.psi, state.eta_hat)
            assert switched_outputs(state, gains).delta == pytest.approx(
                0.0, abs=1e-15)


def test_switched_identity_tracks_active_regime():
    # between resets the master identity holds with psi in place of eta0
    # and the active regime's parameters
    rng = np.random.default_rng(12)
    thetas = (rng.uniform(-2, 2, size=2), rng.uniform(-2, 2, size=2))
    gains = DtGains(f0=0.4, beta=1.0, gamma=0.8)
    sched = SwitchSchedule(reset_instants=[0, 25],
                           regime_of=lambda k: 0 if k < 25 else 1)
    state = SwitchedDtState.initial(np.zeros(2), np.zeros(2), gains.f0)
    m = identity_map(2)
    for k in range(50):
        theta = thetas[0 if k < 25 else 1]
        phi = rng.normal(size=2)
        lhs = (np.eye(2) - gains.f0 * state.F) @ theta
        rhs = state.eta_hat - gains.f0 * (state.F @ state.psi)
        if k not in (0, 25):     # identity re-anchors at each reset snapshot
            assert float(np.max(np.abs(lhs - rhs))) < 1e-10
        state = switched_step(state, _sample(k, phi, phi @ theta), gains,
                              sched, m)


def test_switched_converges_per_regime():
    rng = np.random.default_rng(13)
    thetas = (np.array([1.0, -2.0]), np.array([-0.5, 0.7]))
    gains = DtGains(f0=1.0, beta=1.0, gamma=1.0)
    sched = SwitchSchedule(reset_instants=[0, 40],
                           regime_of=lambda k: 0 if k < 40 else 1)
    state = SwitchedDtState.initial(np.zeros(2), np.zeros(2), gains.f0)
    m = identity_map(2)
    for k in range(80):
        theta = thetas[0 if k < 40 else 1]
        phi = rng.normal(size=2)
        state = switched_step(state, _sample(k, phi, phi @ theta), gains,
                              sched, m)
        if k == 39:
            np.testing.assert_allclose(state.theta_hat, thetas[0], atol=1e-6)
    np.testing.assert_allclose(state.theta_hat, thetas[1], atol=1e-6)
