import numpy as np
import pytest
from hypothesis import given, strategies as st

from ode_mmse import (
    ChannelMatrix,
    ClosedFormState,
    Constant,
    EulerConfig,
    InverseTime,
    Tabulated,
    equilibrium_point,
    euler_trajectory,
    gram_eigensystem,
    mmse_estimate,
    objective_value,
    ode_trajectory_at,
    tode_trajectory_at,
)
from ode_mmse.detectors import euler_states, tode_trajectory, write_trajectory_csv
from ode_mmse.errors import ConfigError, DimensionError, EulerStabilityError
from ode_mmse.model import objective_gradient

from conftest import random_channel, random_vector


def instance(n=8, m=None, seed=0):
    H = random_channel(n, m, seed=seed)
    return H, random_vector(H.m, seed)


def test_mmse_examples():
    np.testing.assert_allclose(mmse_estimate(ChannelMatrix(np.eye(2)), [2, 4], 1.0), [1, 2])
    np.testing.assert_allclose(mmse_estimate(ChannelMatrix([[1.0]]), [3.0], 1.0), [1.5])


def test_mmse_residual():
    H, y = instance(4, seed=1)
    s = mmse_estimate(H, y, 0.7)
    h = H.entries
    r = (h.conj().T @ h + 0.7 * np.eye(4)) @ s - h.conj().T @ y
    assert np.linalg.norm(r) < 1e-10


def test_mmse_dimension_mismatch():
    with pytest.raises(DimensionError):
        mmse_estimate(random_channel(3, 4), np.zeros(3), 1.0)


def test_equilibrium_is_mmse_at_noise_level():
    H, y = instance(seed=2)
    st_ = ClosedFormState.from_observation(H, y)
    np.testing.assert_allclose(equilibrium_point(st_, 0.8), mmse_estimate(H, y, 0.8), atol=1e-12)


def test_equilibrium_identity():
    y = np.array([2.0, -4.0j])
    st_ = ClosedFormState.from_observation(ChannelMatrix(np.eye(2)), y)
    np.testing.assert_allclose(equilibrium_point(st_, 1.0), y / 2, atol=1e-15)


def test_equilibrium_stationary():
    H, y = instance(seed=3)
    x = equilibrium_point(ClosedFormState.from_observation(H, y), 0.3)
    assert np.linalg.norm(objective_gradient(H, y, 0.3, x)) < 1e-10


def test_ode_initial_condition():
    H, y = instance(seed=4)
    st_ = ClosedFormState.from_observation(H, y)
    np.testing.assert_array_equal(ode_trajectory_at(st_, 0.5, 0.0), st_.matched_filter())
    np.testing.assert_allclose(st_.matched_filter(), H.entries.conj().T @ y, atol=1e-12)


def test_ode_long_time_limit():
    H, y = instance(seed=5)
    st_ = ClosedFormState.from_observation(H, y)
    eta = 0.5
    assert st_.eig.eigenvalues[-1] + eta >= 0.5
    np.testing.assert_allclose(ode_trajectory_at(st_, eta, 50.0), equilibrium_point(st_, eta), atol=1e-9)


def test_ode_matches_fine_euler():
    H, y = instance(seed=6)
    st_ = ClosedFormState.from_observation(H, y)
    cfg = EulerConfig(0.7, 1e-5)
    x = euler_states(H, y, Constant(0.5), cfg, [cfg.steps])[0]
    assert np.max(np.abs(x - ode_trajectory_at(st_, 0.5, 0.7))) < 1e-3


def test_tode_initial_condition():
    H, y = instance(seed=7)
    st_ = ClosedFormState.from_observation(H, y, InverseTime(500, 1.0))
    np.testing.assert_array_equal(tode_trajectory_at(st_, 0.0), H.entries.conj().T @ y)


@pytest.mark.parametrize("t", [0.05, 0.4, 2.0])
def test_tode_constant_reduces_to_ode(t):
    H, y = instance(seed=8)
    st_ = ClosedFormState.from_observation(H, y, Constant(0.5))
    scale = np.max(np.abs(st_.matched_filter()))
    diff = np.max(np.abs(tode_trajectory_at(st_, t, 1e-8) - ode_trajectory_at(st_, 0.5, t)))
    assert diff < 10 * 1e-8 * scale


def test_tode_matches_fine_euler_inverse_time():
    """Euler with eta(t_N) at step 1e-5 against the closed form, alpha = 500."""
    H, y = instance(seed=9)
    s = InverseTime(500, 1.0)
    st_ = ClosedFormState.from_observation(H, y, s)
    cfg = EulerConfig(1.0, 1e-5)
    x = euler_states(H, y, s, cfg, [cfg.steps])[0]
    err = float(np.max(np.abs(x - tode_trajectory_at(st_, 1.0))))
    assert err < 1e-3, f"max component error {err:.2e}"


def test_tode_matches_step_averaged_euler():
    H, y = instance(seed=9)
    s = InverseTime(500, 1.0)
    st_ = ClosedFormState.from_observation(H, y, s)
    errs = []
    for dt in (1e-3, 5e-4, 2.5e-4):
        cfg = EulerConfig(1.0, dt)
        x = euler_states(H, y, s, cfg, [cfg.steps], eta_rule="average")[0]
        errs.append(np.max(np.abs(x - tode_trajectory_at(st_, 1.0))))
    # sum of (dt * eta_N)^2 leaves a dt-independent floor near pi^2/(6 alpha^2)
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-3


def test_tode_tabulated_against_euler():
    H, y = instance(4, seed=10)
    s = Tabulated([0, 0.5, 1.0], [3.0, 0.5, 1.0])
    st_ = ClosedFormState.from_observation(H, y, s)
    cfg = EulerConfig(1.0, 1e-5)
    x = euler_states(H, y, s, cfg, [cfg.steps])[0]
    err = float(np.max(np.abs(x - tode_trajectory_at(st_, 1.0))))
    assert err < 1e-3, f"max component error {err:.2e}"


def test_tode_grid_matches_pointwise():
    H, y = instance(seed=12)
    st_ = ClosedFormState.from_observation(H, y, InverseTime(10, 1.0))
    t = np.linspace(0, 1, 11)
    X = tode_trajectory(st_, t)
    for k in (0, 3, 10):
        np.testing.assert_allclose(X[k], tode_trajectory_at(st_, t[k]), rtol=1e-7, atol=1e-12)


def test_euler_hand_step():
    times, xs = euler_trajectory(ChannelMatrix([[1.0]]), [2.0], Constant(1.0), EulerConfig(0.2, 0.1))
    np.testing.assert_allclose(times, [0, 0.1, 0.2])
    assert xs[0][0] == 2.0
    assert xs[1][0] == pytest.approx(1.8)


def test_euler_close_to_closed_form():
    H, y = instance(seed=13)
    st_ = ClosedFormState.from_observation(H, y)
    _, xs = euler_trajectory(H, y, Constant(0.5), EulerConfig(3.0, 1e-3))
    assert np.max(np.abs(xs[-1] - ode_trajectory_at(st_, 0.5, 3.0))) < 2e-3


def test_euler_first_order():
    H, y = instance(seed=14)
    st_ = ClosedFormState.from_observation(H, y)
    errs = []
    for dt in (2e-3, 1e-3):
        times, xs = euler_trajectory(H, y, Constant(0.5), EulerConfig(1.0, dt))
        exact = np.stack([ode_trajectory_at(st_, 0.5, t) for t in times])
        errs.append(np.max(np.abs(xs - exact)))
    assert 1.7 <= errs[0] / errs[1] <= 2.3


def test_euler_instability_rejected():
    H = ChannelMatrix(np.diag([3.0, 1.0]))
    with pytest.raises(EulerStabilityError):
        euler_trajectory(H, [1.0, 1.0], Constant(1.0), EulerConfig(1.0, 0.2))
    with pytest.raises(EulerStabilityError):
        euler_trajectory(H, [1.0, 1.0], InverseTime(0.5, 1.0), EulerConfig(1.0, 0.01))


def test_euler_config_validation():
    with pytest.raises(ConfigError):
        EulerConfig(1.0, 2.0)
    with pytest.raises(ConfigError):
        EulerConfig(1.0, 0.1).step_index([0.05])


@given(st.integers(0, 10_000), st.sampled_from([0.05, 0.5, 3.0]))
def test_descent_along_euler(seed, eta):
    H, y = instance(4, seed=seed)
    _, xs = euler_trajectory(H, y, Constant(eta), EulerConfig(2.0, 1e-2))
    f = [objective_value(H, y, eta, x) for x in xs]
    assert np.all(np.diff(f) <= 1e-9)


@given(st.integers(0, 10_000), st.floats(0.01, 5.0))
def test_exponential_contraction(seed, t):
    H, y = instance(4, seed=seed)
    st_ = ClosedFormState.from_observation(H, y)
    eta = 0.3
    xs = equilibrium_point(st_, eta)
    rate = st_.eig.eigenvalues[-1] + eta
    lhs = np.linalg.norm(ode_trajectory_at(st_, eta, t) - xs)
    rhs = np.exp(-rate * t) * np.linalg.norm(st_.matched_filter() - xs) * (1 + 1e-9)
    assert lhs <= rhs + 1e-15


@given(st.integers(0, 10_000), st.floats(0, 3))
def test_linear_in_observation(seed, t):
    H = random_channel(5, seed=seed)
    eig = gram_eigensystem(H)
    y1, y2 = random_vector(5, seed), random_vector(5, seed + 1)
    x = lambda y: ode_trajectory_at(ClosedFormState.from_observation(H, y, eig=eig), 0.7, t)
    np.testing.assert_allclose(x(y1 + y2), x(y1) + x(y2), atol=1e-10)


def test_trajectory_csv(tmp_path):
    H, y = instance(2, seed=15)
    times, xs = euler_trajectory(H, y, Constant(1.0), EulerConfig(0.01, 1e-3))
    p = write_trajectory_csv(tmp_path / "t.csv", times, xs, {"n": 2})
    lines = p.read_text().splitlines()
    assert lines[0] == "# n: 2"
    assert lines[1] == "t,re0,im0,re1,im1"
    assert len(lines) == 2 + 11
    assert complex(*map(float, lines[2].split(",")[1:3])) == xs[0][0]
