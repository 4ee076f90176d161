import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bohmfree.actions import (
    FreeAction, TimeDomainError, eval_action, hj_residual, hj_residual_of, momentum_field,
)
from bohmfree.core import Units, make_grid


def test_separable_values():
    a = FreeAction.separable(1.0)
    assert eval_action(a, 2.0, 0.0) == pytest.approx(2.0)
    assert eval_action(a, 0.0, 2.0) == pytest.approx(-1.0)


def test_non_separable_values():
    a = FreeAction.non_separable(0.0, 0.0)
    assert eval_action(a, 2.0, 1.0) == pytest.approx(2.0)
    with pytest.raises(TimeDomainError):
        eval_action(FreeAction.non_separable(0.0, 1.0), 0.0, 1.0)
    with pytest.raises(TimeDomainError):
        eval_action(FreeAction.non_separable(0.0, 1.0), 0.0, 0.5)


def test_momentum():
    g = make_grid(-3, 3, 31)
    np.testing.assert_array_equal(momentum_field(FreeAction.separable(3.0), g, 0.7).values, 3.0)
    a = FreeAction.non_separable(0.0, 0.0)
    assert float(a.dx(4.0, 2.0)) == pytest.approx(2.0)
    a = FreeAction.non_separable(1.0, 0.0, Units(mass=2.0))
    assert float(a.dx(1.0, 2.0)) == 0.0


def test_hj_residual_vanishes():
    g = make_grid(-10, 10, 2001)
    assert hj_residual(FreeAction.separable(1.7), g, 0.3).max_abs() <= 1e-12
    assert hj_residual(FreeAction.non_separable(0.5, 0.0), g, 2.0).max_abs() <= 1e-12


def test_negative_control_hook():
    g = make_grid(-2, 2, 41)
    r = hj_residual_of(lambda x: 2 * x, lambda x: 0 * x, g, Units())
    assert r.values[30] == pytest.approx(2.0)  # x = 1


def test_derivatives_match_finite_differences():
    a = FreeAction.non_separable(0.3, -0.5, Units(hbar=0.7, mass=1.9))
    x, t, h = 1.3, 0.8, 1e-5
    assert float(a.dx(x, t)) == pytest.approx((a.value(x + h, t) - a.value(x - h, t)) / (2 * h), rel=1e-8)
    assert float(a.dt(x, t)) == pytest.approx((a.value(x, t + h) - a.value(x, t - h)) / (2 * h), rel=1e-8)
    assert float(a.dxx(x, t)) == pytest.approx((a.dx(x + h, t) - a.dx(x - h, t)) / (2 * h), rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(k=st.floats(-5, 5), x0=st.floats(-5, 5), t0=st.floats(-5, 5), dt=st.floats(0.05, 10),
       m=st.floats(0.1, 10), t=st.floats(-10, 10))
def test_hj_exact_for_any_parameters(k, x0, t0, dt, m, t):
    g = make_grid(-10, 10, 201)
    u = Units(mass=m)
    sep = hj_residual(FreeAction.separable(k, u), g, t)
    assert sep.max_abs() <= 1e-12 * (1 + k * k / m)
    a = FreeAction.non_separable(x0, t0, u)
    r = hj_residual(a, g, t0 + dt)
    scale = m * (10 + abs(x0)) ** 2 / dt**2
    assert r.max_abs() <= 1e-14 * scale + 1e-300
