import math

import pytest
from scipy.special import beta as beta_fn

from exceptions import ValidationError
from periodic import (
    amplitude_scaling_check,
    check_symmetry,
    emit_phase_portrait,
    orbit_radius,
    period_T,
    scaling_slope,
    solve_W,
)

P_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


def beta_oracle(p):
    return 2.0 ** 1.5 * (1.0 + p) ** 0.5 * beta_fn(1.0 / (1.0 + p), 0.5) / (1.0 + p)


@pytest.mark.parametrize('p', P_GRID)
def test_period_matches_beta_function(p):
    assert period_T(p) == pytest.approx(beta_oracle(p), rel=1e-10)


def test_period_control_values():
    assert period_T(1.0) == pytest.approx(2.0 * math.pi, abs=1e-10)
    assert abs(period_T(0.99) - 2.0 * math.pi) / (2.0 * math.pi) < 0.005
    assert period_T(0.5) == pytest.approx(5.9747, abs=1e-4)


@pytest.mark.parametrize('p', [0.0, 1.2, -0.5])
def test_period_rejects_exponent(p):
    with pytest.raises(ValidationError):
        period_T(p)


@pytest.mark.parametrize('p', P_GRID)
def test_orbit_conserves_energy_and_period(p):
    orbit = solve_W(p)
    assert orbit.max_energy_deviation < 1e-8
    assert orbit.energy_level == pytest.approx(1.0 / (1.0 + p))
    assert abs(orbit.period_integrated - period_T(p)) / period_T(p) <= 1e-6
    assert orbit.zeta[-1] >= 3.0 * orbit.period_integrated


def test_harmonic_control_orbit():
    orbit = solve_W(1.0)
    assert orbit.is_control
    assert orbit.period_integrated == pytest.approx(2.0 * math.pi, rel=1e-6)


def test_symmetries_and_shifted_control(orbit):
    report = check_symmetry(orbit)
    assert report.ok
    assert report.even_defect <= 1e-8 and report.antisymmetry_defect <= 1e-8

    broken = check_symmetry(orbit.shifted(1e-3))
    assert not broken.ok


def test_evaluate_outside_samples_rejected(orbit):
    with pytest.raises(ValidationError):
        orbit.evaluate(orbit.zeta[-1] + 1.0)
    assert orbit.evaluate(0.0) == (1.0, 0.0)


@pytest.mark.parametrize('a', [0.25, 0.5, 1.0])
def test_amplitude_scaling(a):
    report = amplitude_scaling_check(0.5, a)
    assert report.ok(1e-6)
    assert report.predicted == pytest.approx(a ** 0.25 * period_T(0.5))


def test_scaling_slope():
    assert scaling_slope(0.5, [0.25, 0.5, 1.0]) == pytest.approx(0.25, abs=1e-6)


def test_orbit_radius_on_axes():
    for p in (0.3, 0.7):
        assert orbit_radius(p, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert orbit_radius(p, 0.5 * math.pi) == pytest.approx(math.sqrt(2.0 / (1.0 + p)), abs=1e-12)


def test_phase_paths_are_nested():
    portrait = emit_phase_portrait([0.7, 0.3, 0.5])
    assert sorted(portrait.orbits) == [0.3, 0.5, 0.7]
    assert len(portrait.nesting) == 2
    assert portrait.nested
    assert portrait.to_dict()['nested'] is True
