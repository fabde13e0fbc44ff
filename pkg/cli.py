"""
Command line for the self-similar solutions laboratory.

Each subcommand loads a RunConfig (defaults, environment, INI file, flags),
runs its computation, writes CSV/JSON/SVG artifacts into the output
directory, updates manifest.json and records the run in the ledger.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
"""

import json
import logging
import math
from datetime import datetime
from multiprocessing import Pool

import click
import numpy as np
import pandas as pd

from exceptions import NumericalFailure, ValidationError
from heteroclinic import (
    HeteroclinicConfig,
    beta_scan,
    case_i_bound,
    case_ii_bound,
    construct_heteroclinic,
    count_transitions,
    eta_star,
    omega_violation,
)
from homoclinic import (
    HomoclinicSeed,
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
from kernels import (
    derived_constants,
    equilibria,
    level_curve_sample,
    level_half_width,
    level_outer_branch,
    lyapunov_V,
    zero_level_root,
)
from pde import (
    BoundaryCondition,
    Grid,
    compare_self_similar,
    convergence_ratio,
    eval_self_similar,
    evolve,
    exact_field,
    front_limit_gap,
    homogeneous_profile,
    profile_from_heteroclinic,
    profile_from_homoclinic,
)
from periodic import amplitude_scaling_check, check_symmetry, emit_phase_portrait, period_T, scaling_slope, solve_W
from plotting import curves_figure, field_figure, level_set_figure, portrait_figure, trajectory_figure
from report_utils import ArtifactWriter, list_runs, record_run
from settings import VERSION, env_out_dir, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

# decay runs resolve the tail down to ~1e-15 before the fit floor cuts in
DECAY_ABS_TOL = 1e-18
FIGURE_POINTS = 2000
OMEGA_TOL = 1e-6


def _configure_logging(level):
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)
    logging.getLogger().setLevel(getattr(logging, level, logging.INFO))


def _map(func, jobs, workers):
    """Ordered map, in a process pool when workers > 1."""
    if workers > 1 and len(jobs) > 1:
        with Pool(min(workers, len(jobs))) as pool:
            return pool.map(func, jobs)
    return [func(job) for job in jobs]


def _thin(*arrays, n=FIGURE_POINTS):
    stride = max(1, len(arrays[0]) // n)
    return tuple(np.asarray(a)[::stride] for a in arrays)


def _execute(ctx, command, config_file, overrides, body):
    """Load the config, run body(config, writer), map failures to exit codes."""
    started = datetime.utcnow()
    try:
        config = load_config(command, config_file, overrides)
    except ValidationError as e:
        _configure_logging('INFO')
        logger.error(f"Invalid configuration: {str(e)}")
        click.echo(f"Error: {str(e)}", err=True)
        ctx.exit(EXIT_VALIDATION)
    except OSError as e:
        click.echo(f"Error: {str(e)}", err=True)
        ctx.exit(EXIT_IO)

    _configure_logging(config.log_level)
    logger.info(f"Starting {command} (config {config.config_hash()[:12]}, p={config.p})")
    writer = None
    code, message = EXIT_OK, None
    try:
        writer = ArtifactWriter(config.out_dir, command, config.config_hash())
        body(config, writer)
        writer.update_manifest()
    except ValidationError as e:
        code, message = EXIT_VALIDATION, str(e)
    except NumericalFailure as e:
        code, message = EXIT_NUMERICAL, f"{type(e).__name__}: {str(e)}"
    except OSError as e:
        code, message = EXIT_IO, str(e)

    status = 'completed' if code == EXIT_OK else 'failed'
    if code != EXIT_OK:
        logger.error(f"{command} failed: {message}")
        click.echo(f"Error: {message}", err=True)
    record_run(config, writer, status, code, message=message, started_at=started)
    if code == EXIT_OK:
        click.echo(f"{command}: wrote {len(writer.written)} files to {config.out_dir}")
    ctx.exit(code)


def common_options(f):
    options = [
        click.option('--p', 'p', type=float, default=None, help='Exponent p in (0, 1).'),
        click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None,
                     help='Output directory (SELFSIM_OUT_DIR).'),
        click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False), default=None,
                     help='INI file with [common] and [<command>] sections.'),
        click.option('--tol-beta', type=float, default=None, help='Bisection tolerance on beta.'),
        click.option('--eta-max', type=float, default=None, help='Integration range |eta| <= eta_max.'),
        click.option('--seed', type=int, default=None, help='Random seed for seed sampling.'),
        click.option('--workers', type=int, default=None, help='Worker processes for sweeps.'),
        click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
                     default=None, help='Logging level (SELFSIM_LOG_LEVEL).'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _split(kwargs):
    config_file = kwargs.pop('config_file')
    return config_file, kwargs


@click.group()
@click.version_option(VERSION)
def cli():
    """Self-similar solutions of u_t - u_xx = u|u|^(p-1), 0 < p < 1."""


# ---------------------------------------------------------------- levelset

def _levelset(config, writer):
    params = derived_constants(config.p)
    levels = list(config.c_values) or [params.c_star * k / config.c_levels for k in range(config.c_levels + 1)]
    rows, summary, curves, outer = [], [], [], []
    for c in levels:
        points = level_curve_sample(params, c, config.n_points)
        curves.append((c, points))
        xs = np.array([pt.x for pt in points])
        ys = np.array([pt.y for pt in points])
        for i, (x, y) in enumerate(zip(xs, ys)):
            rows.append({'c': c, 'index': i, 'x': x, 'y': y})
        deviation = max(abs(lyapunov_V(params, pt) - c) for pt in points)
        summary.append({
            'c': c,
            'n_points': len(points),
            'half_width': level_half_width(params, c),
            'closure_gap': float(math.hypot(xs[0] - xs[-1], ys[0] - ys[-1])),
            'max_V_deviation': deviation,
        })
        if c > 0.0:
            bx, by = level_outer_branch(params, c, 1.6 * params.x_eq)
            for sx in (1.0, -1.0):
                for sy in (1.0, -1.0):
                    outer.append((c, sx * bx, sy * by))

    writer.write_csv('levelset_curves.csv', pd.DataFrame(rows, columns=['c', 'index', 'x', 'y']))
    writer.write_json('levelset.json', {
        'p': config.p,
        'constants': params.to_dict(),
        'zero_level_root': zero_level_root(params),
        'equilibria': [list(pt) for pt in equilibria(params)],
        'levels': summary,
        'curves_closed': all(s['closure_gap'] < 1e-12 for s in summary),
    })
    writer.write_svg('levelset.svg', level_set_figure(params, curves, outer))


@cli.command()
@common_options
@click.option('--c', 'c_values', type=float, multiple=True, help='Explicit level values (repeatable).')
@click.pass_context
def levelset(ctx, **kwargs):
    """Level curves of V inside the separatrix."""
    config_file, overrides = _split(kwargs)
    overrides['c_values'] = tuple(overrides['c_values']) or None
    _execute(ctx, 'levelset', config_file, overrides, _levelset)


# -------------------------------------------------------------- homoclinic

def _homoclinic_job(job):
    """One seed: run, containment and monotonicity checks, optional decay fit."""
    p, alpha, beta, eta_max, q_values, fit, fit_eta_min, fit_floor, dump = job
    params = derived_constants(p)
    seed = HomoclinicSeed(alpha, beta)
    config = IntegratorConfig(eta_max=eta_max, abs_tol=DECAY_ABS_TOL if fit else 1e-12)
    result = run_homoclinic(params, seed, config)
    eta, x, y = result.merged()

    report = result.to_dict()
    report['monotone_plus'] = check_monotone_F(result.forward).to_dict()
    report['monotone_minus'] = check_monotone_F(result.backward).to_dict()
    report['max_abs_x'] = float(np.abs(x).max())
    report['bounded'] = report['max_abs_x'] <= params.x_eq + 1e-9
    report['two_signed'] = sign_changes(result.forward) > 0 and sign_changes(result.backward) > 0
    report['y_decay_bound'] = y_decay_bound_check(result, params).to_dict()
    report['small_amplitude_entry'] = small_amplitude_entry(result.forward, params)
    if alpha == 0.0 or beta == 0.0:
        even, odd = symmetry_defect(result)
        kind = 'odd' if alpha == 0.0 else 'even'
        report['symmetry'] = {'kind': kind, 'defect': odd if kind == 'odd' else even}

    decay = None
    if fit:
        try:
            envelope = extract_envelope(result.forward)
            decay = fit_decay(envelope, params, eta_min=fit_eta_min, eta_max=eta_max, floor=fit_floor,
                              traj=result.forward)
            report['decay'] = decay.to_dict()
        except NumericalFailure as e:
            logger.warning(f"Decay fit failed for seed ({alpha}, {beta}): {str(e)}")
            report['decay'] = {'error': str(e)}
    report['gaussian_slope'] = decay.gaussian_slope if decay else None
    report['A_inf'] = decay.A_inf_estimate if decay else None
    report['lq'] = {f"{q:g}": lq_norm(result, q, params, decay).to_dict() for q in q_values}

    frame = pd.DataFrame({'eta': eta, 'x': x, 'y': y}) if dump else None
    return report, _thin(eta, x), frame


def _homoclinic(config, writer):
    params = derived_constants(config.p)
    seeds = [HomoclinicSeed(a, b).validate(params) for a, b in config.seeds]
    seeds += sample_seeds(params, config.n_random_seeds, rng_seed=config.seed, level=config.seed_level)
    n_explicit = len(config.seeds)
    jobs = [
        (config.p, s.alpha, s.beta, config.eta_max, config.q_values, i < n_explicit,
         config.fit_eta_min, config.fit_floor, bool(config.dump_trajectories))
        for i, s in enumerate(seeds)
    ]
    logger.info(f"Running {len(jobs)} homoclinic seeds on {config.workers} worker(s)")
    outcomes = _map(_homoclinic_job, jobs, config.workers)

    rows, curves = [], []
    for i, (report, (eta, x), frame) in enumerate(outcomes):
        report['index'] = i
        report['p'] = config.p
        writer.write_json(f"homoclinic_seed_{i:03d}.json", report)
        if frame is not None:
            writer.write_csv(f"homoclinic_trajectory_{i:03d}.csv", frame)
        rows.append({
            'index': i,
            'alpha': report['seed']['alpha'],
            'beta': report['seed']['beta'],
            'c_seed': report['c_seed'],
            'converged_plus': report['converged_plus'],
            'converged_minus': report['converged_minus'],
            'F_limit_plus': report['F_limit_plus'],
            'F_limit_minus': report['F_limit_minus'],
            'contained': report['contained'],
            'monotone': report['monotone_plus']['ok'] and report['monotone_minus']['ok'],
            'max_abs_x': report['max_abs_x'],
            'gaussian_slope': report['gaussian_slope'],
            'A_inf': report['A_inf'],
        })
        if i < 6:
            curves.append((f"({report['seed']['alpha']:.3g}, {report['seed']['beta']:.3g})", eta, x, 'line'))

    writer.write_csv('homoclinic_summary.csv', pd.DataFrame(rows))
    writer.write_svg('homoclinic.svg', curves_figure(curves, f"Homoclinic connections, p={config.p}", 'eta', 'x'))
    failed = [r['index'] for r in rows if not (r['converged_plus'] and r['converged_minus'])]
    if failed:
        logger.warning(f"Seeds {failed} did not reach the convergence radius")


@cli.command()
@common_options
@click.option('--seed-point', 'seed_points', multiple=True, help="Seed 'alpha beta' (repeatable).")
@click.option('--random-seeds', 'n_random_seeds', type=int, default=None,
              help='Additional rejection-sampled seeds.')
@click.option('--dump-trajectories', is_flag=True, default=None, help='Write one trajectory CSV per seed.')
@click.pass_context
def homoclinic(ctx, **kwargs):
    """Homoclinic connections from a seed list."""
    config_file, overrides = _split(kwargs)
    points = overrides.pop('seed_points')
    try:
        overrides['seeds'] = tuple(tuple(float(v) for v in s.split()) for s in points) or None
    except ValueError:
        click.echo(f"Error: cannot parse --seed-point {points}", err=True)
        ctx.exit(EXIT_VALIDATION)
    overrides['dump_trajectories'] = 1 if overrides['dump_trajectories'] else None
    _execute(ctx, 'homoclinic', config_file, overrides, _homoclinic)


# --------------------------------------------------------------- decay-fit

def _decay_job(job):
    p, alpha, beta, eta_max, fit_eta_min, fit_floor = job
    params = derived_constants(p)
    result = run_homoclinic(params, HomoclinicSeed(alpha, beta), IntegratorConfig(eta_max=eta_max,
                                                                                  abs_tol=DECAY_ABS_TOL))
    envelope = extract_envelope(result.forward)
    fit = fit_decay(envelope, params, eta_min=fit_eta_min, eta_max=eta_max, floor=fit_floor, traj=result.forward)
    return envelope, fit


def _decay_fit(config, writer):
    params = derived_constants(config.p)
    seeds = [HomoclinicSeed(a, b).validate(params) for a, b in config.seeds]
    jobs = [(config.p, s.alpha, s.beta, config.eta_max, config.fit_eta_min, config.fit_floor) for s in seeds]
    outcomes = _map(_decay_job, jobs, config.workers)

    rows, fits, curves = [], [], []
    power = 1.0 + 2.0 / (1.0 - config.p)
    for i, (seed, (envelope, fit)) in enumerate(zip(seeds, outcomes)):
        eta = np.array([e for e, _ in envelope])
        amp = np.array([a for _, a in envelope])
        model = fit.A_inf_estimate * eta ** (-power * fit.log_correction) * np.exp(-0.25 * fit.gaussian_slope * eta ** 2)
        used = (eta >= fit.window[0]) & (eta <= fit.window[1]) & (amp > fit.floor)
        for e, a, m, u in zip(eta, amp, model, used):
            rows.append({'seed_index': i, 'eta': e, 'amplitude': a, 'model': m, 'used': bool(u)})
        fits.append({'seed': seed.to_dict(), **fit.to_dict()})
        curves.append((f"envelope {i}", eta, np.log10(amp), 'marker'))
        curves.append((f"fit {i}", eta[used], np.log10(model[used]), 'line'))

    watson_eta = np.arange(2.0, 13.0, 1.0)
    writer.write_csv('decay_envelope.csv', pd.DataFrame(rows, columns=['seed_index', 'eta', 'amplitude', 'model', 'used']))
    writer.write_json('decay_fit.json', {
        'p': config.p,
        'envelope_power': power,
        'fits': fits,
        'watson': [{'eta': e, 'ratio': r} for e, r in zip(watson_eta, watson_ratio(watson_eta))],
    })
    writer.write_svg('decay_envelope.svg', curves_figure(curves, f"Tail envelope, p={config.p}", 'eta', 'log10 |x|'))


@cli.command('decay-fit')
@common_options
@click.option('--seed-point', 'seed_points', multiple=True, help="Seed 'alpha beta' (repeatable).")
@click.pass_context
def decay_fit(ctx, **kwargs):
    """Gaussian envelope fit of homoclinic tails."""
    config_file, overrides = _split(kwargs)
    points = overrides.pop('seed_points')
    try:
        overrides['seeds'] = tuple(tuple(float(v) for v in s.split()) for s in points) or None
    except ValueError:
        click.echo(f"Error: cannot parse --seed-point {points}", err=True)
        ctx.exit(EXIT_VALIDATION)
    _execute(ctx, 'decay-fit', config_file, overrides, _decay_fit)


# ------------------------------------------------------------ heteroclinic

def _heteroclinic(config, writer):
    params = derived_constants(config.p)
    hconfig = HeteroclinicConfig(tol_beta=config.tol_beta).with_horizon(config.horizon)
    result = construct_heteroclinic(params, hconfig)
    traj = result.trajectory

    violation = omega_violation(result, params)
    terminal = float(math.hypot(traj.x[-1] - params.x_eq, traj.y[-1]))
    betas = np.linspace(config.scan_min, config.scan_max, config.scan_n)
    if config.workers > 1:
        with Pool(config.workers) as pool:
            outcomes = beta_scan(params, betas, hconfig.shot, pool=pool)
    else:
        outcomes = beta_scan(params, betas, hconfig.shot)

    payload = result.to_dict()
    payload.update({
        'constants': params.to_dict(),
        'case_ii_bound': case_ii_bound(params),
        'case_i_bound': case_i_bound(params),
        'eta_star': eta_star(params, result.beta_star),
        'horizon': config.horizon,
        'terminal_distance': terminal,
        'omega_violation': violation,
        'inside_omega': violation <= OMEGA_TOL,
        'scan_transitions': count_transitions(outcomes),
    })
    writer.write_json('heteroclinic.json', payload)
    writer.write_csv('heteroclinic_trajectory.csv', result.extended.to_frame())
    writer.write_csv('heteroclinic_scan.csv', pd.DataFrame(
        [{'beta': o.beta, 'outcome': o.case.value, 'eta_beta': o.eta_beta} for o in outcomes],
        columns=['beta', 'outcome', 'eta_beta'],
    ))
    writer.write_svg('heteroclinic.svg', trajectory_figure(
        [(f"beta*={result.beta_star:.10g}", result.extended)], f"Front profile, p={config.p}"))
    if payload['scan_transitions'] != 1:
        logger.warning(f"beta scan shows {payload['scan_transitions']} case II -> case I transitions")


@cli.command()
@common_options
@click.option('--scan-n', type=int, default=None, help='Number of beta values in the scan.')
@click.pass_context
def heteroclinic(ctx, **kwargs):
    """Heteroclinic front by shooting and bisection on beta."""
    config_file, overrides = _split(kwargs)
    _execute(ctx, 'heteroclinic', config_file, overrides, _heteroclinic)


# ---------------------------------------------------------------- periodic

def _periodic_job(p):
    orbit = solve_W(p)
    symmetry = check_symmetry(orbit)
    predicted = period_T(p)
    row = {
        'p': p,
        'period_T': predicted,
        'period_integrated': orbit.period_integrated,
        'rel_error': abs(orbit.period_integrated - predicted) / predicted,
        'max_energy_deviation': orbit.max_energy_deviation,
        'even_defect': symmetry.even_defect,
        'antisymmetry_defect': symmetry.antisymmetry_defect,
        'control': orbit.is_control,
    }
    return row, orbit


def _periodic(config, writer):
    p_values = sorted(config.p_grid)
    outcomes = _map(_periodic_job, p_values + [1.0], config.workers)
    rows = [row for row, _ in outcomes]
    orbits = {orbit.p: orbit for _, orbit in outcomes if not orbit.is_control}
    control = rows[-1]
    control['two_pi_error'] = abs(control['period_T'] - 2.0 * math.pi)

    scaling = [amplitude_scaling_check(config.p, a).to_dict() for a in config.amplitudes]
    slope = scaling_slope(config.p, config.amplitudes) if len(config.amplitudes) > 1 else None
    portrait = emit_phase_portrait(p_values, orbits=orbits)

    samples = []
    for p, orbit in orbits.items():
        mask = orbit.zeta <= orbit.period_integrated
        for z, w, wp in zip(orbit.zeta[mask], orbit.W[mask], orbit.Wprime[mask]):
            samples.append({'p': p, 'zeta': z, 'W': w, 'Wprime': wp})

    writer.write_csv('periodic_table.csv', pd.DataFrame(rows, columns=[
        'p', 'period_T', 'period_integrated', 'rel_error', 'max_energy_deviation',
        'even_defect', 'antisymmetry_defect', 'control']))
    writer.write_csv('periodic_scaling.csv', pd.DataFrame(scaling))
    writer.write_csv('periodic_orbits.csv', pd.DataFrame(samples, columns=['p', 'zeta', 'W', 'Wprime']))
    writer.write_json('periodic.json', {
        'p_values': p_values,
        'table': rows,
        'scaling': {'p': config.p, 'checks': scaling, 'slope': slope, 'predicted_slope': 0.5 * (1.0 - config.p)},
        'portrait': portrait.to_dict(),
    })
    writer.write_svg('periodic_portrait.svg', portrait_figure(portrait))
    if not portrait.nested:
        logger.warning("Phase paths are not nested in p")


@cli.command()
@common_options
@click.pass_context
def periodic(ctx, **kwargs):
    """Oscillator period table and phase portrait."""
    config_file, overrides = _split(kwargs)
    _execute(ctx, 'periodic', config_file, overrides, _periodic)


# -------------------------------------------------------------- pde-verify

def _pde_job(job):
    kind, config = job
    params = derived_constants(config.p)
    if kind == 'homogeneous':
        profile, bc = homogeneous_profile(params), BoundaryCondition.SELF_SIMILAR_FRONT
    elif kind == 'homoclinic':
        alpha, beta = config.seeds[0]
        profile = profile_from_homoclinic(params, HomoclinicSeed(alpha, beta), eta_max=config.eta_max)
        bc = BoundaryCondition.ZERO
    else:
        hconfig = HeteroclinicConfig(tol_beta=config.tol_beta).with_horizon(config.horizon)
        profile = profile_from_heteroclinic(params, construct_heteroclinic(params, hconfig))
        bc = BoundaryCondition.SELF_SIMILAR_FRONT

    L = config.domain_half_width
    residual_grid = Grid(L=L, nx=config.residual_nx, t0=config.t0, t1=config.t1, cfl=config.cfl)
    convergence = convergence_ratio(profile, residual_grid)

    grid = Grid(L=L, nx=config.nx, t0=config.t0, t1=config.t1, cfl=config.cfl)
    initial = exact_field(profile, grid, config.t0)
    evolved = evolve(initial, grid, bc, params, profile)
    norms = compare_self_similar(evolved, profile)

    report = {
        'profile': profile.to_dict(),
        'boundary': bc.value,
        'residual': convergence.coarse.to_dict(),
        'convergence': convergence.to_dict(),
        'evolution': norms.to_dict(),
        'max_bound_excess': evolved.max_bound_excess,
        'steps': evolved.steps,
        'two_signed': evolved.two_signed,
    }
    if kind == 'front':
        report['front_limit_gap'] = list(front_limit_gap(profile, L, config.t1))
    frame = pd.DataFrame({
        'x': grid.x,
        'u_initial': initial.u,
        'u_evolved': evolved.u,
        'u_exact': eval_self_similar(profile, grid.x, config.t1),
    })
    return report, frame


def _pde_verify(config, writer):
    outcomes = _map(_pde_job, [(kind, config) for kind in config.profiles], config.workers)
    reports, rows, fields = {}, [], []
    for kind, (report, frame) in zip(config.profiles, outcomes):
        reports[kind] = report
        writer.write_csv(f"pde_field_{kind}.csv", frame)
        conv = report['convergence']
        rows.append({
            'profile': kind,
            'dx_coarse': conv['nx_coarse_dx'],
            'dx_fine': conv['nx_fine_dx'],
            'coarse_smooth_max': conv['coarse_smooth_max'],
            'fine_smooth_max': conv['fine_smooth_max'],
            'ratio': conv['ratio'],
            'evolution_rel_sup': report['evolution']['rel_sup'],
            'max_bound_excess': report['max_bound_excess'],
        })
        fields.append((f"{kind} evolved", frame['x'].to_numpy(), frame['u_evolved'].to_numpy()))

    writer.write_csv('pde_convergence.csv', pd.DataFrame(rows))
    writer.write_json('pde_verify.json', {
        'p': config.p,
        'grid': {'L': config.domain_half_width, 'nx': config.nx, 'residual_nx': config.residual_nx,
                 't0': config.t0, 't1': config.t1, 'cfl': config.cfl},
        'profiles': reports,
    })
    writer.write_svg('pde_fields.svg', field_figure(fields, f"Evolved fields at t={config.t1}, p={config.p}"))


@cli.command('pde-verify')
@common_options
@click.option('--nx', type=int, default=None, help='Grid points for evolution (odd).')
@click.option('--cfl', type=float, default=None, help='dt / dx^2, at most 0.5.')
@click.option('--profile', 'profiles', multiple=True,
              type=click.Choice(['homogeneous', 'homoclinic', 'front']), help='Profiles to verify (repeatable).')
@click.pass_context
def pde_verify(ctx, **kwargs):
    """Finite-difference residual and evolution cross-check of self-similar fields."""
    config_file, overrides = _split(kwargs)
    overrides['profiles'] = tuple(overrides['profiles']) or None
    _execute(ctx, 'pde-verify', config_file, overrides, _pde_verify)


# -------------------------------------------------------------------- runs

@cli.command()
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None)
@click.option('--limit', type=int, default=20, show_default=True)
def runs(out_dir, limit):
    """List recorded runs, newest first."""
    out_dir = out_dir or env_out_dir()
    try:
        for run in list_runs(out_dir, limit=limit):
            click.echo(json.dumps(run, sort_keys=True))
    except Exception as e:
        logger.error(f"Error listing runs in {out_dir}: {str(e)}")
        click.echo(f"Error: {str(e)}", err=True)
        raise SystemExit(EXIT_IO)


def main():
    cli()


if __name__ == '__main__':
    main()
