import mpmath
import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, strategies as st

from ode_mmse import Constant, InverseTime, Tabulated, eta_at, xi_at
from ode_mmse.errors import ConfigError


def test_eta_examples():
    assert eta_at(Constant(0.5), 7) == 0.5
    assert eta_at(InverseTime(1, 1.0, 1e-8), 0) == pytest.approx(1e8 + 1, rel=1e-15)
    assert abs(eta_at(InverseTime(500, 1.0), 10) - 1) < 3e-4


def test_xi_examples():
    assert xi_at(Constant(2), 3).xi == 6
    ref = float(mpmath.log((1 + mpmath.mpf("1e-8")) / mpmath.mpf("1e-8")) + 1)
    assert xi_at(InverseTime(1, 1.0, 1e-8), 1).xi == pytest.approx(ref, rel=1e-14)
    assert ref == pytest.approx(19.420680753, abs=1e-9)
    for s in (Constant(2), InverseTime(3, 1.0), Tabulated([0, 1], [1, 2])):
        assert xi_at(s, 0).xi == 0


def test_negative_time_rejected():
    with pytest.raises(ConfigError):
        eta_at(Constant(1), -1)
    with pytest.raises(ConfigError):
        xi_at(InverseTime(1, 1), -0.5)


def test_invalid_parameters():
    with pytest.raises(ConfigError):
        Constant(0)
    with pytest.raises(ConfigError):
        InverseTime(0, 1)
    with pytest.raises(ConfigError):
        Tabulated([0.1, 1], [1, 1])
    with pytest.raises(ConfigError):
        Tabulated([0, 1], [1, 0])
    with pytest.raises(ConfigError):
        Tabulated([0, 1, 1], [1, 1, 1])


def test_tabulated_interpolation_and_clamp():
    s = Tabulated([0, 1, 2], [3, 1, 2])
    assert eta_at(s, 0.5) == 2
    assert eta_at(s, 1.5) == 1.5
    assert eta_at(s, 10) == 2


@pytest.mark.parametrize("t", [0.3, 1.0, 1.7, 2.0, 5.0])
def test_tabulated_xi_matches_quadrature(t):
    s = Tabulated([0, 0.4, 1, 2], [3, 1, 2.5, 0.5])
    ref, _ = scipy.integrate.quad(lambda u: s.eta(u), 0, t, points=[0.4, 1, 2], limit=200)
    assert xi_at(s, t).xi == pytest.approx(ref, rel=1e-12)


schedules = st.one_of(
    st.floats(0.01, 100).map(Constant),
    st.tuples(st.floats(0.1, 1000), st.floats(0.01, 10)).map(lambda p: InverseTime(*p)),
)


@given(schedules, st.floats(0, 10), st.floats(1e-3, 10))
def test_xi_monotone(s, t1, gap):
    assert s.xi(t1) < s.xi(t1 + gap)


@given(schedules, st.floats(0.01, 5))
def test_xi_derivative_is_eta(s, t):
    h = 1e-6
    d = (s.xi(t + h) - s.xi(t - h)) / (2 * h)
    assert d == pytest.approx(s.eta(t), rel=1e-4)


@given(st.floats(0.01, 100), st.floats(0, 100))
def test_constant_xi_exact(eta, t):
    assert xi_at(Constant(eta), t).xi == eta * t


def test_vectorized_evaluation():
    s = InverseTime(10, 1.0)
    t = np.array([0.0, 0.5, 1.0])
    np.testing.assert_array_equal(s.xi(t), [s.xi(x) for x in t])
