import math

import numpy as np
import pytest

from exceptions import NumericalFailure, StepBudgetExceeded, ValidationError
from integrator import Direction, EventSpec, IntegratorConfig, Trajectory, check_monotone_F, integrate, solve
from kernels import PhasePoint


def harmonic(eta, x, y):
    return (y, -x)


TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, eta_max=2.0 * math.pi)


def test_harmonic_oscillator_returns_after_one_period():
    traj = solve(harmonic, 0.0, (1.0, 0.0), Direction.FORWARD, TIGHT)
    assert traj.status == 'horizon'
    assert traj.eta[-1] == pytest.approx(2.0 * math.pi, abs=1e-14)
    assert traj.x[-1] == pytest.approx(1.0, abs=1e-9)
    assert traj.y[-1] == pytest.approx(0.0, abs=1e-9)
    assert np.all(np.diff(traj.eta) > 0.0)


def test_dense_output_between_samples():
    traj = solve(harmonic, 0.0, (1.0, 0.0), Direction.FORWARD, TIGHT)
    eta = np.linspace(0.05, 6.0, 37)
    x, y = traj.interpolate(eta)
    np.testing.assert_allclose(x, np.cos(eta), atol=1e-6)
    np.testing.assert_allclose(y, -np.sin(eta), atol=1e-6)


def test_terminal_event_is_located_on_dense_output():
    event = EventSpec('x_zero', lambda eta, x, y: x, direction=-1, terminal=True)
    traj = solve(harmonic, 0.0, (1.0, 0.0), Direction.FORWARD, TIGHT, events=(event,))
    assert traj.status == 'event'
    hit = traj.events_named('x_zero')[0]
    assert hit.eta == pytest.approx(0.5 * math.pi, abs=1e-8)
    assert traj.eta[-1] == hit.eta
    assert hit.y == pytest.approx(-1.0, abs=1e-8)


def test_non_terminal_events_in_both_directions():
    event = EventSpec('x_zero', lambda eta, x, y: x, direction=0)
    traj = solve(harmonic, 0.0, (1.0, 0.0), Direction.FORWARD, TIGHT, events=(event,))
    assert [round(h.eta, 6) for h in traj.events] == [round(0.5 * math.pi, 6), round(1.5 * math.pi, 6)]

    backward = solve(harmonic, 0.0, (1.0, 0.0), Direction.BACKWARD, TIGHT, events=(event,))
    assert [round(h.eta, 6) for h in backward.events] == [round(-0.5 * math.pi, 6), round(-1.5 * math.pi, 6)]


def test_backward_run_mirrors_forward_run_for_even_seed(params):
    start = (0.0, PhasePoint(0.1, 0.0))
    config = IntegratorConfig(eta_max=6.0)
    forward = integrate(params, start, Direction.FORWARD, config)
    backward = integrate(params, start, Direction.BACKWARD, config)
    assert backward.direction is Direction.BACKWARD
    np.testing.assert_array_equal(backward.eta, -forward.eta)
    np.testing.assert_allclose(backward.x, forward.x, rtol=0.0, atol=1e-15)
    np.testing.assert_allclose(backward.y, -forward.y, rtol=0.0, atol=1e-15)


def test_samples_carry_V(params):
    traj = integrate(params, (0.0, PhasePoint(0.1, 0.05)), Direction.FORWARD, IntegratorConfig(eta_max=2.0))
    frame = traj.to_frame()
    assert list(frame.columns) == ['eta', 'x', 'y', 'V']
    expected = 0.5 * traj.y ** 2 - traj.x ** 2 + np.abs(traj.x) ** 1.5 / 1.5
    np.testing.assert_allclose(traj.value, expected, atol=1e-15)


def test_lyapunov_value_never_increases(even_run):
    for traj in (even_run.forward, even_run.backward):
        report = check_monotone_F(traj)
        assert report.ok
        assert report.max_violation <= 1e-9


def test_step_budget():
    config = TIGHT.with_(max_steps=5)
    with pytest.raises(StepBudgetExceeded):
        solve(harmonic, 0.0, (1.0, 0.0), Direction.FORWARD, config)


def test_blow_up_is_reported_with_last_state():
    config = IntegratorConfig(eta_max=2.0, h_min=1e-10)
    with pytest.raises(NumericalFailure) as excinfo:
        solve(lambda eta, x, y: (x * x, 0.0), 0.0, (1.0, 0.0), Direction.FORWARD, config)
    assert excinfo.value.eta == pytest.approx(1.0, abs=1e-2)
    assert excinfo.value.state is not None


@pytest.mark.parametrize('changes', [
    {'rel_tol': 0.0},
    {'abs_tol': -1.0},
    {'h_min': 1.0, 'h_max': 0.1},
    {'eta_max': float('inf')},
    {'max_steps': 0},
])
def test_invalid_settings_rejected(changes):
    with pytest.raises(ValidationError):
        IntegratorConfig(**changes).validate()


def test_start_beyond_horizon_rejected(params):
    with pytest.raises(ValidationError):
        integrate(params, (13.0, PhasePoint(0.1, 0.0)), Direction.FORWARD)



def test_equilibrium_stays_put(params):
    traj = integrate(params, (0.0, PhasePoint(0.25, 0.0)), Direction.FORWARD, IntegratorConfig(eta_max=5.0))
    assert traj.eta[-1] == pytest.approx(5.0)
    assert np.abs(traj.x - 0.25).max() <= 1e-8
    assert np.abs(traj.y).max() <= 1e-8


def test_slope_sandwich_near_the_axis(params):
    beta = 1.0
    traj = integrate(params, (0.0, PhasePoint(0.0, beta)), Direction.FORWARD, IntegratorConfig(eta_max=0.5))
    inner = traj.eta > 0.0
    eta, x, y = traj.eta[inner], traj.x[inner], traj.y[inner]
    assert np.all((0.5 * beta < y) & (y < beta))
    assert np.all((0.5 * beta * eta < x) & (x < beta * eta))


def test_halving_rel_tol_barely_moves_the_end_state(params):
    start = (0.0, PhasePoint(0.1, 0.0))
    rel_tol = 1e-8
    coarse = integrate(params, start, Direction.FORWARD, IntegratorConfig(rel_tol=rel_tol, eta_max=5.0))
    fine = integrate(params, start, Direction.FORWARD, IntegratorConfig(rel_tol=0.5 * rel_tol, eta_max=5.0))
    _, x0, y0 = coarse.terminal
    _, x1, y1 = fine.terminal
    assert max(abs(x1 - x0), abs(y1 - y0)) < 10.0 * rel_tol


def test_monotonicity_check_flags_an_increase():
    eta = np.linspace(0.0, 1.0, 6)
    value = np.array([0.02, 0.015, 0.01, 0.011, 0.005, 0.0])
    zeros = np.zeros_like(eta)
    traj = Trajectory(direction=Direction.FORWARD, eta=eta, x=zeros, y=zeros, value=value, dx=zeros, dy=zeros)
    report = check_monotone_F(traj)
    assert not report.ok
    assert report.max_violation == pytest.approx(1e-3)
    assert report.worst_eta == pytest.approx(0.6)
