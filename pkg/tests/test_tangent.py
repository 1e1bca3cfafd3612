import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quakebend.bend import boundary_length_function
from quakebend.ptorus import SYMMETRIC_L_GAMMA
from quakebend.tangent import (
    NonFiniteValueError,
    StepSchedule,
    homogeneity_check,
    inverse_tangent_check,
    one_sided_derivative,
    second_one_sided_difference,
    tangent_map,
    tangent_map_exists,
)

F = boundary_length_function(SYMMETRIC_L_GAMMA)


def test_schedule_validation():
    with pytest.raises(ValueError):
        StepSchedule(h0=1e-10, rho=0.1, k=8)
    with pytest.raises(ValueError):
        StepSchedule(rho=1.0)
    with pytest.raises(ValueError):
        StepSchedule(k=2)


def test_absolute_value_tangent():
    assert one_sided_derivative(abs, 0.0, 1).value[0] == pytest.approx(1, abs=1e-12)
    assert one_sided_derivative(abs, 0.0, -1).value[0] == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("d", [1, -1])
def test_smooth_function(d):
    assert abs(one_sided_derivative(lambda t: t * t, 0.0, d).value[0]) < 1e-8


def test_boundary_function_left_derivative():
    assert abs(one_sided_derivative(F, 0.0, -1).value[0]) < 1e-4


def test_second_differences():
    rep = second_one_sided_difference(lambda t: t * t, 0.0)
    assert rep.right == pytest.approx(2, abs=1e-6) and rep.left == pytest.approx(2, abs=1e-6)
    assert rep.gap < 1e-6
    rep = second_one_sided_difference(lambda t: 0.0 if t >= 0 else t * t, 0.0)
    assert rep.right == pytest.approx(0, abs=1e-6) and rep.left == pytest.approx(2, abs=1e-6)
    assert rep.gap == abs(rep.right - rep.left)


def test_boundary_function_corner():
    rep = second_one_sided_difference(F, 0.0)
    assert rep.right == pytest.approx(0, abs=1e-3)
    assert rep.left == pytest.approx(-0.25, abs=1e-3)
    assert rep.gap == pytest.approx(0.25, abs=1e-3)


def test_non_finite_values_raise():
    with pytest.raises(NonFiniteValueError):
        one_sided_derivative(lambda t: 1 / t if t else math.inf, 0.0, 1)


def test_homogeneity_of_absolute_value():
    T = tangent_map(abs, 0.0)
    assert homogeneity_check(T, [-1.0], [2.0]) < 1e-8
    assert homogeneity_check(T, [-1.0, 0.5], [0.0, 1.0]) < 1e-12


@given(st.floats(-2, 2), st.floats(0, 3))
def test_homogeneity_smooth_map(x, a):
    f = lambda v: np.array([np.sin(v[0]) + v[1] ** 2, np.exp(v[0] * v[1])])
    T = tangent_map(f, np.array([x, 0.3]))
    assert homogeneity_check(T, [np.array([1.0, -0.5])], [a]) <= 1e-6 * max(1, a)


def test_left_and_right_agree_on_smooth_function():
    f = lambda t: math.exp(t) * math.sin(3 * t)
    r = one_sided_derivative(f, 0.4, 1)
    l = one_sided_derivative(f, 0.4, -1)
    assert abs(r.value[0] + l.value[0]) <= max(10 * max(r.dispersion, l.dispersion), 1e-9)


def test_stable_under_halving():
    f = lambda t: math.cos(t) + t**3
    a = one_sided_derivative(f, 0.2, 1)
    b = one_sided_derivative(f, 0.2, 1, StepSchedule(h0=5e-3))
    assert abs(a.value[0] - b.value[0]) <= max(10 * a.dispersion, 1e-10)


def test_inverse_tangent_linear():
    A = np.array([[2.0, 1.0], [0.5, 3.0]])
    Ai = np.linalg.inv(A)
    dirs = [np.array([1.0, 0.0]), np.array([0.3, -1.0]), np.array([-1.0, -1.0])]
    assert inverse_tangent_check(lambda v: A @ v, lambda w: Ai @ w, np.zeros(2), dirs) <= 1e-8


def test_inverse_tangent_piecewise_linear():
    # stretch the lower half-plane by 2; the exact inverse halves it
    phi = lambda v: np.array([v[0], v[1] if v[1] >= 0 else 2 * v[1]])
    inv = lambda w: np.array([w[0], w[1] if w[1] >= 0 else w[1] / 2])
    dirs = [np.array([np.cos(a), np.sin(a)]) for a in np.linspace(0, 2 * np.pi, 12, endpoint=False)]
    assert inverse_tangent_check(phi, inv, np.zeros(2), dirs) <= 1e-6


def test_tangent_map_exists():
    assert tangent_map_exists(abs, 0.0, [1.0, -1.0])
    assert not tangent_map_exists(lambda t: math.sqrt(abs(t)), 0.0, [1.0])
