import math
from dataclasses import replace

import numpy as np
import pytest

import heteroclinic
from exceptions import BracketFailure, ValidationError
from heteroclinic import (
    Bracket,
    HeteroclinicConfig,
    ShotCase,
    ShotOutcome,
    beta_scan,
    bisect_beta,
    case_i_bound,
    case_ii_bound,
    classify_shot,
    construct_heteroclinic,
    count_transitions,
    eta_star,
    extend_by_reflection,
    fit_tail,
    initial_bracket,
    is_open_at,
    omega_violation,
    trajectory_distance,
)
from kernels import derived_constants


def test_analytic_bounds(params):
    assert case_ii_bound(params) == pytest.approx(0.204124, abs=1e-6)
    assert case_i_bound(params) == pytest.approx(0.5, abs=1e-12)
    assert eta_star(params, 0.6) == pytest.approx(min(
        2.0 / 0.6 * (-0.125 + math.sqrt(0.015625 + 0.18)), 0.25 / 0.6))
    with pytest.raises(ValidationError):
        eta_star(params, 0.0)


def test_shots_on_either_side(params):
    low = classify_shot(params, 0.15)
    high = classify_shot(params, 0.6)
    assert low.case is ShotCase.CASE_II
    assert 0.0 < low.x < params.x_eq and low.y == pytest.approx(0.0, abs=1e-9)
    assert high.case is ShotCase.CASE_I
    assert high.x == pytest.approx(params.x_eq, abs=1e-9) and high.y > 0.0
    assert low.sandwich_ok and high.sandwich_ok
    assert low.trajectory is not None


def test_classification_is_open(params):
    assert is_open_at(params, 0.15)
    assert is_open_at(params, 0.6)


def test_invalid_beta_rejected(params):
    with pytest.raises(ValidationError):
        classify_shot(params, -0.1)
    with pytest.raises(ValidationError):
        Bracket(0.5, 0.2)


def test_scan_has_one_transition(params):
    outcomes = beta_scan(params, np.linspace(0.1, 0.7, 25))
    assert [o.beta for o in outcomes] == pytest.approx(list(np.linspace(0.1, 0.7, 25)))
    assert outcomes[0].case is ShotCase.CASE_II
    assert outcomes[-1].case is ShotCase.CASE_I
    assert count_transitions(outcomes) == 1


def test_bracket_is_valid(params):
    bracket = initial_bracket(params)
    assert bracket.beta_lo < case_ii_bound(params) < case_i_bound(params) < bracket.beta_hi
    assert bracket.widenings == 0


@pytest.mark.slow
@pytest.mark.parametrize('p', [0.3, 0.5, 0.7])
def test_bisection_traps_the_connection(p):
    params = derived_constants(p)
    result = bisect_beta(params, initial_bracket(params))
    assert result.interval_width <= 1e-9
    assert result.iterations <= 60
    traj = result.trajectory
    assert traj.eta[-1] == pytest.approx(10.0)
    assert math.hypot(traj.x[-1] - params.x_eq, traj.y[-1]) < 1e-3
    assert omega_violation(result, params) < 1e-6
    inner = (traj.eta > 0.0) & (traj.eta <= 6.0)
    assert np.all(traj.y[inner] > 0.0)
    assert np.all((traj.x[inner] > 0.0) & (traj.x[inner] < params.x_eq))
    assert np.all(traj.y[inner] <= result.beta_star * (1.0 + 1e-12))


@pytest.mark.slow
def test_front_at_one_half(params, front):
    assert case_ii_bound(params) < front.beta_star < case_i_bound(params)
    assert front.tail is not None
    assert 0.9 <= front.tail.gaussian_slope <= 1.1
    assert front.tail.A_inf > 0.0
    payload = front.to_dict()
    for key in ('p', 'beta_lo', 'beta_hi', 'beta_star', 'interval_width', 'iterations', 'tail'):
        assert key in payload
    assert set(payload['tail']) >= {'A_inf', 'slope'}


@pytest.mark.slow
def test_reflection_gives_an_odd_front(params, front):
    full = front.extended
    assert full.eta[0] == pytest.approx(-10.0) and full.eta[-1] == pytest.approx(10.0)
    assert np.count_nonzero(full.eta == 0.0) == 1
    np.testing.assert_array_equal(full.x, -full.x[::-1])
    np.testing.assert_array_equal(full.y, full.y[::-1])
    assert full.x[0] == pytest.approx(-params.x_eq, abs=1e-3)


def test_reflection_needs_a_forward_run_from_zero(params):
    shot = classify_shot(params, 0.15)
    extend_by_reflection(shot.trajectory)
    with pytest.raises(ValidationError):
        extend_by_reflection(replace(shot.trajectory, eta=shot.trajectory.eta + 1.0))


def test_tail_fit_on_synthetic_front():
    x_eq = 0.25
    eta = np.linspace(0.0, 10.0, 2001)
    gap = 0.3 * eta[1:] ** -3.0 * np.exp(-eta[1:] ** 2 / 4.0)
    x = np.concatenate([[0.0], x_eq - gap])
    fit = fit_tail(eta, x, x_eq, window=(3.0, 8.0), remove_growing_mode=False)
    assert fit.gaussian_slope == pytest.approx(1.0, abs=1e-6)
    assert fit.A_inf == pytest.approx(0.3, rel=1e-5)
    assert not fit.shrunk


def test_tail_fit_removes_growing_mode():
    x_eq = 0.25
    eta = np.linspace(1.0, 10.0, 1801)
    gap = 0.3 * eta ** -3.0 * np.exp(-eta ** 2 / 4.0)
    x = x_eq - gap - 1e-9 * (eta ** 2 + 2.0)
    fit = fit_tail(eta, x, x_eq, window=(3.0, 6.0))
    assert fit.growing_mode == pytest.approx(1e-9, rel=1e-3)
    assert fit.gaussian_slope == pytest.approx(1.0, abs=0.05)


def test_config_validation():
    with pytest.raises(ValidationError):
        HeteroclinicConfig(tol_beta=0.0).validate()
    with pytest.raises(ValidationError):
        HeteroclinicConfig(tail_window=(3.0, 12.0)).validate()
    config = HeteroclinicConfig().with_horizon(8.0)
    assert config.shot.eta_max == 8.0 and config.final.eta_max == 8.0


def test_distance_between_runs(params):
    a = classify_shot(params, 0.3).trajectory
    assert trajectory_distance(a, a, 2.0) == 0.0
    b = classify_shot(params, 0.3 * (1 + 1e-6)).trajectory
    assert 0.0 < trajectory_distance(a, b, 2.0) < 1e-5


@pytest.mark.slow
def test_construct_runs_every_stage(params):
    result = construct_heteroclinic(params, HeteroclinicConfig(tol_beta=1e-6))
    assert result.interval_width <= 1e-6
    assert result.extended is not None and result.tail is not None


def test_short_horizon_undecided_shot_is_not_a_connection(params):
    short = HeteroclinicConfig(tail_window=(0.5, 1.0)).with_horizon(1.0)
    with pytest.raises(BracketFailure):
        bisect_beta(params, initial_bracket(params), config=short)


@pytest.mark.parametrize('distance,accepted', [(0.2, False), (0.01, True)])
def test_undecided_shot_must_end_near_equilibrium(params, monkeypatch, distance, accepted):
    def undecided(params, beta, config=None, keep_trajectory=True, undecided_radius=None):
        assert undecided_radius == 0.05
        return ShotOutcome(case=ShotCase.UNDECIDED, beta=beta, eta=10.0, x=params.x_eq - distance, y=0.0,
                           terminal_distance=distance)

    monkeypatch.setattr(heteroclinic, 'classify_shot', undecided)
    bracket = Bracket(0.3, 0.4)
    if accepted:
        result = bisect_beta(params, bracket)
        assert result.accepted_undecided
        assert result.beta_star == pytest.approx(0.35)
        assert result.iterations == 1
    else:
        with pytest.raises(BracketFailure):
            bisect_beta(params, bracket)


def test_undecided_radius_must_be_positive():
    with pytest.raises(ValidationError):
        HeteroclinicConfig(undecided_radius=0.0).validate()


def test_exit_comes_after_the_a_priori_bound(params):
    outcomes = beta_scan(params, np.linspace(0.1, 0.7, 25))
    decided = [o for o in outcomes if o.case is not ShotCase.UNDECIDED]
    assert len(decided) == 25
    for outcome in decided:
        assert outcome.eta_beta > eta_star(params, outcome.beta)


@pytest.mark.parametrize('beta,case', [(0.15, ShotCase.CASE_II), (0.6, ShotCase.CASE_I)])
def test_continuous_dependence_on_beta(params, beta, case):
    a = classify_shot(params, beta)
    b = classify_shot(params, beta + 1e-8)
    assert a.case is case and b.case is case
    assert trajectory_distance(a.trajectory, b.trajectory, min(a.eta_beta, b.eta_beta)) < 1e-5
