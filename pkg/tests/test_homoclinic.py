import math

import numpy as np
import pytest

from exceptions import NotEnoughOscillations, ValidationError
from homoclinic import (
    HomoclinicSeed,
    algebraic_ratio,
    derivative_decay_profile,
    envelope_power,
    extract_envelope,
    fit_decay,
    lq_norm,
    run_homoclinic,
    sample_seeds,
    sign_changes,
    small_amplitude_entry,
    symmetry_defect,
    watson_ratio,
    y_decay_bound_check,
)
from integrator import IntegratorConfig, check_monotone_F
from kernels import lyapunov_V


@pytest.mark.parametrize('alpha,beta', [
    (0.0, 0.0),
    (0.25, 0.0),
    (-0.25, 0.0),
    (0.3, 0.0),
    (0.0, 0.3),
    (float('nan'), 0.0),
])
def test_invalid_seeds_rejected(params, alpha, beta):
    with pytest.raises(ValidationError) as excinfo:
        HomoclinicSeed(alpha, beta).validate(params)
    assert excinfo.value.keys == ['seed']


def test_even_seed_converges_in_both_directions(params, even_run):
    assert even_run.converged_plus and even_run.converged_minus
    assert even_run.contained
    assert even_run.c_seed == pytest.approx(lyapunov_V(params, (0.1, 0.0)))
    assert even_run.F_limit_plus < even_run.c_seed
    assert abs(even_run.F_limit_plus) < 1e-6 and abs(even_run.F_limit_minus) < 1e-6
    eta, x, _ = even_run.merged()
    assert np.all(np.diff(eta) > 0.0)
    assert np.abs(x).max() <= params.x_eq + 1e-9


def test_solutions_change_sign(even_run):
    assert sign_changes(even_run.forward) > 0
    assert sign_changes(even_run.backward) > 0


def test_even_and_odd_symmetry(even_run, odd_run):
    even, _ = symmetry_defect(even_run)
    _, odd = symmetry_defect(odd_run)
    assert even <= 1e-8
    assert odd <= 1e-8


@pytest.mark.slow
def test_random_seed_sweep(params):
    seeds = sample_seeds(params, 20, rng_seed=0)
    assert len(seeds) == 20
    for seed in seeds:
        assert lyapunov_V(params, (seed.alpha, seed.beta)) <= 0.9 * params.c_star
        result = run_homoclinic(params, seed)
        assert result.converged_plus and result.converged_minus
        assert result.max_containment_excess <= 1e-8
        assert check_monotone_F(result.forward).ok and check_monotone_F(result.backward).ok
        _, x, _ = result.merged()
        assert np.abs(x).max() <= params.x_eq + 1e-9


def test_sampling_is_reproducible(params):
    a = sample_seeds(params, 5, rng_seed=7)
    b = sample_seeds(params, 5, rng_seed=7)
    assert a == b
    with pytest.raises(ValidationError):
        sample_seeds(params, 1, level=0.0)


@pytest.mark.slow
def test_gaussian_envelope_fit(params, decay_run):
    envelope = extract_envelope(decay_run.forward)
    etas = [e for e, _ in envelope]
    assert etas == sorted(etas)
    fit = fit_decay(envelope, params, eta_min=4.0, eta_max=12.0, floor=1e-13, traj=decay_run.forward)
    assert 0.9 <= fit.gaussian_slope <= 1.1
    assert fit.A_inf_estimate > 0.0
    assert fit.window[0] == 4.0
    assert fit.algebraic_exponent_check <= 1.0
    assert envelope_power(params) == pytest.approx(5.0)


def test_envelope_needs_oscillations(params, even_run):
    short = run_homoclinic(params, HomoclinicSeed(0.1, 0.0), IntegratorConfig(eta_max=2.0))
    with pytest.raises(NotEnoughOscillations):
        extract_envelope(short.forward, eta_start=3.0)
    envelope = extract_envelope(even_run.forward)
    with pytest.raises(NotEnoughOscillations):
        fit_decay(envelope, params, floor=1.0)


def test_lq_norms(params, even_run):
    one = lq_norm(even_run, 1.0, params)
    two = lq_norm((even_run.forward, even_run.backward), 2.0, params)
    assert one.value > 0.0 and two.value > 0.0
    assert not one.below_guaranteed_range
    small = lq_norm(even_run, 0.1, params)
    assert small.below_guaranteed_range
    with pytest.raises(ValidationError):
        lq_norm(even_run, 0.0, params)


def test_watson_ratio_tends_to_one():
    eta = np.array([4.0, 6.0, 8.0, 12.0])
    ratio = watson_ratio(eta)
    assert abs(ratio[-1] - 1.0) < 0.02
    assert np.all(np.diff(np.abs(ratio - 1.0)) < 0.0)


def test_derivative_bounds(params, even_run):
    assert y_decay_bound_check(even_run, params).ok
    inner, outer = derivative_decay_profile(even_run)
    assert outer <= inner
    entry = small_amplitude_entry(even_run.forward, params)
    assert entry is not None and 0.0 <= entry < 12.0


def test_report_keys(even_run):
    report = even_run.to_dict()
    for key in ('seed', 'c_seed', 'converged_plus', 'converged_minus', 'F_limit_plus', 'F_limit_minus'):
        assert key in report
    assert report['eta_max'] == pytest.approx(12.0)
    assert math.isfinite(report['max_containment_excess'])


def test_fit_recovers_synthetic_envelope(params):
    etas = np.arange(4.0, 12.0 + 0.25, 0.5)
    envelope = [(e, e ** -5.0 * math.exp(-0.25 * e * e)) for e in etas]
    fit = fit_decay(envelope, params, eta_min=4.0, eta_max=12.0)
    assert fit.gaussian_slope == pytest.approx(1.0, abs=1e-8)
    assert fit.log_correction == pytest.approx(1.0, abs=1e-8)
    assert fit.A_inf_estimate == pytest.approx(1.0, rel=1e-6)
    assert fit.n_points == len(etas)
    assert fit.algebraic_exponent_check is None and fit.algebraic_ratio_pointwise is None


def test_lq_without_fit_has_no_tail(params, even_run):
    norm = lq_norm(even_run, 2.0, params)
    assert norm.tail == 0.0
    assert not norm.tail_estimated
    assert norm.to_dict()['tail_estimated'] is False


@pytest.mark.slow
def test_lq_tail_is_small_with_fit(params, decay_run):
    envelope = extract_envelope(decay_run.forward)
    fit = fit_decay(envelope, params, eta_min=4.0, eta_max=12.0, floor=1e-13, traj=decay_run.forward)
    for q in (1.0, 2.0):
        norm = lq_norm(decay_run, q, params, fit)
        assert norm.tail_estimated
        assert 0.0 <= norm.tail_fraction < 0.01


@pytest.mark.slow
def test_envelope_decreases_with_shrinking_gaps(decay_run):
    envelope = [(e, a) for e, a in extract_envelope(decay_run.forward, eta_start=4.0) if a > 1e-13 and e <= 12.0]
    etas = np.array([e for e, _ in envelope])
    amps = np.array([a for _, a in envelope])
    assert len(etas) >= 4
    assert np.all(np.diff(amps) < 0.0)
    assert np.all(np.diff(np.diff(etas)) < 0.0)


@pytest.mark.slow
def test_pointwise_algebraic_ratio_is_reported(params, decay_run):
    pointwise = algebraic_ratio(decay_run.forward, params, half_window=0.0)
    assert pointwise is not None and math.isfinite(pointwise) and pointwise >= 0.0
    envelope = extract_envelope(decay_run.forward)
    fit = fit_decay(envelope, params, eta_min=4.0, eta_max=12.0, floor=1e-13, traj=decay_run.forward)
    report = fit.to_dict()
    assert report['algebraic_ratio_pointwise'] == pytest.approx(pointwise)
    assert report['algebraic_ratio_local_sup'] == fit.algebraic_exponent_check
