import math

import numpy as np
import pytest

from exceptions import RankDeficientFit, ValidationError
from kernels import (
    Membership,
    derived_constants,
    equilibria,
    gaussian_tail_lstsq,
    grad_V,
    level_curve_sample,
    level_half_width,
    level_membership,
    level_outer_branch,
    lyapunov_V,
    lyapunov_V_array,
    reaction_H,
    reaction_H_array,
    rhs_Q,
    signed_power,
    u_minus,
    u_plus,
    zero_level_root,
)


def test_derived_constants_at_one_half(params):
    assert params.x_eq == pytest.approx(0.25, abs=1e-15)
    assert params.c_star == pytest.approx(0.0625 / 3.0, abs=1e-15)
    assert params.lambda_min == pytest.approx(0.0625, abs=1e-15)
    assert params.m_H == pytest.approx(-0.125, abs=1e-14)
    assert params.growth_exponent == pytest.approx(2.0)


@pytest.mark.parametrize('p', [0.1, 0.3, 0.7, 0.9])
def test_derived_constants_closed_forms(p):
    c = derived_constants(p)
    assert c.x_eq == pytest.approx((1 - p) ** (1 / (1 - p)), rel=1e-14)
    assert lyapunov_V(c, (c.x_eq, 0.0)) == pytest.approx(c.c_star, rel=1e-12)
    assert reaction_H(c, c.lambda_min) == pytest.approx(c.m_H, rel=1e-12)
    assert c.m_H < 0.0


@pytest.mark.parametrize('p', [0.0, 1.0, 1.5, -0.2, float('nan')])
def test_exponent_outside_unit_interval_rejected(p):
    with pytest.raises(ValidationError) as excinfo:
        derived_constants(p)
    assert 'p' in excinfo.value.keys


def test_exponent_too_close_to_one_rejected():
    with pytest.raises(ValidationError) as excinfo:
        derived_constants(0.99)
    assert 'p' in excinfo.value.keys


def test_reaction_is_odd_with_three_zeros(params):
    for x in (0.0, params.x_eq, -params.x_eq):
        assert reaction_H(params, x) == pytest.approx(0.0, abs=1e-15)
    xs = np.linspace(-0.4, 0.4, 41)
    np.testing.assert_allclose(reaction_H_array(params, xs), -reaction_H_array(params, -xs), atol=1e-15)
    assert signed_power(0.0, 0.5) == 0.0
    assert signed_power(-4.0, 0.5) == -2.0


def test_vector_field_dissipates_V_at_rate_eta_y_squared(params):
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, y, eta = rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-5, 5)
        gx, gy = grad_V(params, (x, y))
        qx, qy = rhs_Q(params, eta, (x, y))
        assert gx * qx + gy * qy == pytest.approx(-0.5 * eta * y * y, abs=1e-15)


def test_V_array_matches_scalar(params):
    xs = np.array([-0.2, 0.0, 0.1])
    ys = np.array([0.05, -0.1, 0.0])
    expected = [lyapunov_V(params, (x, y)) for x, y in zip(xs, ys)]
    np.testing.assert_allclose(lyapunov_V_array(params, xs, ys), expected, rtol=1e-14)


def test_equilibria_and_cauchy_bounds(params):
    origin, right, left = equilibria(params)
    assert origin == (0.0, 0.0)
    assert right.x == params.x_eq and left.x == -params.x_eq
    assert float(u_plus(params, 4.0)) == pytest.approx(4.0)
    assert float(u_minus(params, 4.0)) == pytest.approx(-4.0)
    assert float(u_plus(params, -1.0)) == 0.0
    assert lyapunov_V(params, (zero_level_root(params), 0.0)) == pytest.approx(0.0, abs=1e-15)
    assert zero_level_root(params) == pytest.approx(4.0 / 9.0)


def test_level_curves_are_closed_and_on_level(params):
    for k in range(1, 10):
        c = params.c_star * k / 9.0
        points = level_curve_sample(params, c, 128)
        assert len(points) == 128
        assert math.hypot(points[0].x - points[-1].x, points[0].y - points[-1].y) < 1e-12
        assert max(abs(lyapunov_V(params, pt) - c) for pt in points) < 1e-9
        assert max(abs(pt.x) for pt in points) <= params.x_eq + 1e-12


def test_zero_level_is_the_origin(params):
    assert level_curve_sample(params, 0.0, 64) == [(0.0, 0.0)]
    assert level_half_width(params, 0.0) == 0.0


def test_level_above_c_star_rejected(params):
    with pytest.raises(ValidationError):
        level_curve_sample(params, params.c_star * 1.01, 64)
    with pytest.raises(ValidationError):
        level_membership(params, (0.0, 0.0), -1e-3)


def test_level_membership(params):
    c = 0.5 * params.c_star
    x_c = level_half_width(params, c)
    assert level_membership(params, (0.0, 0.0), c) is Membership.INSIDE
    assert level_membership(params, (x_c, 0.0), c) is Membership.ON
    assert level_membership(params, (0.0, 0.2), c) is Membership.OUTSIDE
    assert level_membership(params, (0.3, 0.0), c) is Membership.OUTSIDE


def test_outer_branch_lies_on_level(params):
    c = 0.5 * params.c_star
    x, y = level_outer_branch(params, c, 0.4)
    assert len(x) > 0 and np.all(x > params.x_eq)
    np.testing.assert_allclose(lyapunov_V_array(params, x, y), c, atol=1e-14)


def test_gaussian_tail_fit_recovers_model():
    eta = np.linspace(3.0, 10.0, 40)
    values = 2.0 * eta ** -5.0 * np.exp(-eta ** 2 / 4.0)
    fit = gaussian_tail_lstsq(eta, values, 5.0)
    assert fit.gaussian_slope == pytest.approx(1.0, abs=1e-8)
    assert fit.power_slope == pytest.approx(1.0, abs=1e-8)
    assert math.exp(fit.log_amplitude) == pytest.approx(2.0, rel=1e-7)

    fixed = gaussian_tail_lstsq(eta, values, 5.0, fit_power=False)
    assert fixed.power_slope == 1.0
    assert fixed.gaussian_slope == pytest.approx(1.0, abs=1e-8)


def test_gaussian_tail_fit_needs_points_and_positive_values():
    with pytest.raises(RankDeficientFit):
        gaussian_tail_lstsq([4.0, 5.0, 6.0], [1e-3, 1e-4, 1e-5], 5.0)
    with pytest.raises(RankDeficientFit):
        gaussian_tail_lstsq([4.0, 5.0, 6.0, 7.0, 8.0], [1e-3, 0.0, 1e-5, 1e-6, 1e-7], 5.0)
