"""
Shooting construction of the heteroclinic connection from the origin's
y-axis to (x_eq, 0).

A zero-value (0, beta), beta > 0, starts inside Omega = {0 < x < x_eq, y > 0}
and either leaves through x = x_eq with y > 0 (case I), turns back through
y = 0 with 0 < x < x_eq (case II), or stays in Omega for all eta (the
connection). Explicit bounds on beta separate the first two cases; bisection
between them traps the connection, and odd reflection extends it to a front
joining (-x_eq, 0) to (x_eq, 0).
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from exceptions import BracketFailure, DegenerateShot, RankDeficientFit, ValidationError
from integrator import Direction, EventSpec, IntegratorConfig, Trajectory, integrate
from kernels import PhasePoint, gaussian_tail_lstsq

logger = logging.getLogger(__name__)

SANDWICH_RTOL = 1e-12
TAIL_POWER = 3.0
# shortest horizon at which a shot that never left Omega stands in for the connection
ACCEPT_HORIZON = 10.0


class ShotCase(str, enum.Enum):
    CASE_I = 'case_i'
    CASE_II = 'case_ii'
    UNDECIDED = 'undecided'


@dataclass(frozen=True, eq=False)
class ShotOutcome:
    """
    Classification of the shot from (0, beta).

    CASE_I: eta is where x reached x_eq, y the exit slope.
    CASE_II: eta is where y reached 0, x the turning abscissa.
    UNDECIDED: eta is the horizon and terminal_distance the distance to (x_eq, 0).
    """

    case: ShotCase
    beta: float
    eta: float
    x: float
    y: float
    terminal_distance: Optional[float] = None
    sandwich_ok: bool = True
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def eta_beta(self):
        return self.eta

    def to_dict(self):
        return {
            'beta': self.beta,
            'outcome': self.case.value,
            'eta_beta': self.eta,
            'x': self.x,
            'y': self.y,
            'terminal_distance': self.terminal_distance,
            'sandwich_ok': self.sandwich_ok,
        }


@dataclass(frozen=True)
class HeteroclinicConfig:
    tol_beta: float = 1e-9
    max_iter: int = 60
    horizon: float = 10.0
    bracket_delta: float = 1e-3
    max_widenings: int = 10
    undecided_radius: float = 0.05
    tail_window: tuple = (3.0, 8.0)
    shot: IntegratorConfig = IntegratorConfig(eta_max=10.0)
    final: IntegratorConfig = IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15, h_max=0.05, eta_max=10.0)

    def validate(self):
        bad = []
        if not (self.tol_beta > 0.0):
            bad.append('tol_beta')
        if self.max_iter <= 0:
            bad.append('max_iter')
        if not (self.horizon > 0.0):
            bad.append('horizon')
        if not (0.0 < self.bracket_delta < 1.0):
            bad.append('bracket_delta')
        if not (self.undecided_radius > 0.0):
            bad.append('undecided_radius')
        lo, hi = self.tail_window
        if not (0.0 < lo < hi <= self.horizon):
            bad.append('tail_window')
        if bad:
            raise ValidationError(f"Invalid heteroclinic settings: {', '.join(bad)}", keys=bad)
        self.shot.validate()
        self.final.validate()
        return self

    def with_horizon(self, horizon):
        return replace(
            self,
            horizon=horizon,
            shot=self.shot.with_(eta_max=horizon),
            final=self.final.with_(eta_max=horizon),
        )


def eta_star(params, beta):
    """Local a priori bound: min{(2/beta)(m_H + sqrt(m_H^2 + beta^2/2)), x_eq/beta}."""
    if not (beta > 0.0):
        raise ValidationError(f"beta must be positive, got {beta}", keys=['beta'])
    m = params.m_H
    return min(2.0 / beta * (m + math.sqrt(m * m + 0.5 * beta * beta)), params.x_eq / beta)


def case_ii_bound(params):
    """Every beta below sqrt((1-p)^{2/(1-p)}/(1+p)) turns back through y = 0."""
    p = params.p
    return math.sqrt((1.0 - p) ** (2.0 / (1.0 - p)) / (1.0 + p))


def case_i_bound(params):
    """Every beta above sqrt(2((x_eq - m_H)^2 - m_H^2)) crosses x = x_eq."""
    m = params.m_H
    return math.sqrt(2.0 * ((params.x_eq - m) ** 2 - m * m))


def _exit_events(params):
    x_eq = params.x_eq
    return (
        EventSpec('exit_x', lambda eta, x, y: x - x_eq, direction=1, terminal=True),
        EventSpec('turn_y', lambda eta, x, y: y, direction=-1, terminal=True),
    )


def _sandwich_holds(traj, beta, limit):
    mask = (traj.eta > 0.0) & (traj.eta <= limit)
    if not np.any(mask):
        return True
    eta, x, y = traj.eta[mask], traj.x[mask], traj.y[mask]
    slack = SANDWICH_RTOL * beta
    return bool(
        np.all(y >= 0.5 * beta - slack) and np.all(y <= beta + slack)
        and np.all(x >= 0.5 * beta * eta - slack * eta) and np.all(x <= beta * eta * (1.0 + SANDWICH_RTOL))
    )


def classify_shot(params, beta, config=None, keep_trajectory=True, undecided_radius=None):
    """
    Integrate from (0, (0, beta)) with terminal events on x = x_eq (rising)
    and y = 0 (falling), and classify the exit.

    A hit where both event functions are within event_tol is retried once
    with tighter tolerances and reported as DegenerateShot if it persists.
    undecided_radius only sets the distance from (x_eq, 0) beyond which an
    undecided run is logged as far from the equilibrium.
    """
    if not (beta > 0.0 and math.isfinite(beta)):
        raise ValidationError(f"beta must be positive and finite, got {beta}", keys=['beta'])
    config = config or HeteroclinicConfig().shot
    radius = HeteroclinicConfig().undecided_radius if undecided_radius is None else undecided_radius
    traj = integrate(params, (0.0, PhasePoint(0.0, beta)), Direction.FORWARD, config, _exit_events(params))
    limit = eta_star(params, beta)

    if traj.status == 'event':
        hit = traj.events[-1]
        tol = config.event_tol
        if abs(hit.x - params.x_eq) <= tol and abs(hit.y) <= tol:
            if config.event_tol > 1e-14:
                logger.debug(f"Degenerate exit for beta={beta!r}, retrying with tighter tolerances")
                tighter = config.with_(event_tol=config.event_tol / 100.0, rel_tol=config.rel_tol / 10.0)
                return classify_shot(params, beta, tighter, keep_trajectory, radius)
            raise DegenerateShot(f"beta={beta!r} exits through the corner (x_eq, 0)", beta)
        case = ShotCase.CASE_I if hit.name == 'exit_x' else ShotCase.CASE_II
        outcome = ShotOutcome(case=case, beta=beta, eta=hit.eta, x=hit.x, y=hit.y)
        if hit.eta <= limit:
            logger.warning(f"beta={beta!r} left Omega at eta={hit.eta:.6g}, inside the a priori bound {limit:.6g}")
    else:
        eta_h, x_h, y_h = traj.terminal
        distance = math.hypot(x_h - params.x_eq, y_h)
        if distance > radius:
            logger.warning(f"beta={beta!r} stayed in Omega to eta={eta_h} but ended {distance:.3e} from (x_eq, 0)")
        outcome = ShotOutcome(case=ShotCase.UNDECIDED, beta=beta, eta=eta_h, x=x_h, y=y_h,
                              terminal_distance=distance)

    sandwich = _sandwich_holds(traj, beta, min(limit, outcome.eta))
    if not sandwich:
        logger.warning(f"Slope sandwich violated on (0, {limit:.6g}] for beta={beta!r}")
    return replace(outcome, sandwich_ok=sandwich, trajectory=traj if keep_trajectory else None)


@dataclass(frozen=True)
class Bracket:
    beta_lo: float
    beta_hi: float
    widenings: int = 0

    def __post_init__(self):
        if not (0.0 < self.beta_lo < self.beta_hi):
            raise ValidationError(f"Invalid bracket [{self.beta_lo}, {self.beta_hi}]", keys=['bracket'])

    @property
    def width(self):
        return self.beta_hi - self.beta_lo

    def to_dict(self):
        return {'beta_lo': self.beta_lo, 'beta_hi': self.beta_hi, 'widenings': self.widenings}


def initial_bracket(params, config=None):
    """
    Nudge the two analytic bounds outward by bracket_delta and validate them by
    classification; an endpoint that misclassifies is moved outward
    geometrically (lo halved, hi doubled) up to max_widenings times.
    """
    config = (config or HeteroclinicConfig()).validate()
    lo = case_ii_bound(params) * (1.0 - config.bracket_delta)
    hi = case_i_bound(params) * (1.0 + config.bracket_delta)
    widenings = 0

    while classify_shot(params, lo, config.shot, keep_trajectory=False).case is not ShotCase.CASE_II:
        widenings += 1
        if widenings > config.max_widenings:
            raise BracketFailure(f"No case II shot found down to beta={lo!r} for p={params.p}")
        lo *= 0.5
        logger.info(f"Lower bracket end moved to {lo!r}")

    hi_widenings = 0
    while classify_shot(params, hi, config.shot, keep_trajectory=False).case is not ShotCase.CASE_I:
        hi_widenings += 1
        if hi_widenings > config.max_widenings:
            raise BracketFailure(f"No case I shot found up to beta={hi!r} for p={params.p}")
        hi *= 2.0
        logger.info(f"Upper bracket end moved to {hi!r}")

    if lo >= hi:
        raise BracketFailure(f"Bracket collapsed: lo={lo!r} >= hi={hi!r}")
    return Bracket(beta_lo=lo, beta_hi=hi, widenings=widenings + hi_widenings)


@dataclass(frozen=True)
class TailFit:
    A_inf: float
    gaussian_slope: float
    log_correction: float
    growing_mode: float
    window: tuple
    n_points: int
    residual_rms: float
    shrunk: bool = False

    def to_dict(self):
        return {
            'A_inf': self.A_inf,
            'slope': self.gaussian_slope,
            'log_correction': self.log_correction,
            'growing_mode': self.growing_mode,
            'window': list(self.window),
            'n_points': self.n_points,
            'residual_rms': self.residual_rms,
            'window_shrunk': self.shrunk,
        }


@dataclass(frozen=True, eq=False)
class HeteroclinicResult:
    p: float
    bracket: Bracket
    beta_lo: float
    beta_hi: float
    beta_star: float
    interval_width: float
    iterations: int
    trajectory: Trajectory = field(repr=False)
    accepted_undecided: bool = False
    extended: Optional[Trajectory] = field(default=None, repr=False)
    tail: Optional[TailFit] = None

    def to_dict(self):
        return {
            'p': self.p,
            'beta_lo': self.bracket.beta_lo,
            'beta_hi': self.bracket.beta_hi,
            'final_lo': self.beta_lo,
            'final_hi': self.beta_hi,
            'beta_star': self.beta_star,
            'interval_width': self.interval_width,
            'iterations': self.iterations,
            'accepted_undecided': self.accepted_undecided,
            'tail': self.tail.to_dict() if self.tail else None,
        }


def bisect_beta(params, bracket, tol_beta=None, config=None):
    """
    Bisection on beta: case II moves lo up, case I moves hi down. An undecided
    shot is accepted at once as beta_star when it ran to eta >= 10 and ended
    within undecided_radius of (x_eq, 0); any other undecided shot raises
    BracketFailure. The returned trajectory is recomputed
    at beta_star to the horizon without exit events.
    """
    config = (config or HeteroclinicConfig()).validate()
    tol_beta = config.tol_beta if tol_beta is None else tol_beta
    if not (tol_beta > 0.0):
        raise ValidationError(f"tol_beta must be positive, got {tol_beta}", keys=['tol_beta'])

    lo, hi = bracket.beta_lo, bracket.beta_hi
    iterations = 0
    beta_star = None
    while hi - lo > tol_beta:
        if iterations >= config.max_iter:
            raise BracketFailure(
                f"Bisection stopped after {iterations} iterations with width {hi - lo:.3e} > {tol_beta:.1e}"
            )
        iterations += 1
        mid = 0.5 * (lo + hi)
        outcome = classify_shot(params, mid, config.shot, keep_trajectory=False,
                                undecided_radius=config.undecided_radius)
        logger.debug(f"Bisection {iterations}: beta={mid!r} -> {outcome.case.value}")
        if outcome.case is ShotCase.CASE_II:
            lo = mid
        elif outcome.case is ShotCase.CASE_I:
            hi = mid
        else:
            if outcome.eta < ACCEPT_HORIZON * (1.0 - 1e-12):
                raise BracketFailure(
                    f"beta={mid!r} stayed in Omega only to the horizon eta={outcome.eta:.4g} < {ACCEPT_HORIZON}"
                )
            if outcome.terminal_distance > config.undecided_radius:
                raise BracketFailure(
                    f"beta={mid!r} stayed in Omega to eta={outcome.eta:.4g} but ended "
                    f"{outcome.terminal_distance:.3e} from (x_eq, 0), outside {config.undecided_radius}"
                )
            beta_star = mid
            break

    accepted_undecided = beta_star is not None
    if beta_star is None:
        beta_star = 0.5 * (lo + hi)
    width = hi - lo
    logger.info(f"Bisection converged for p={params.p}: beta*={beta_star!r} "
                f"(width {width:.3e}, {iterations} iterations)")

    trajectory = integrate(params, (0.0, PhasePoint(0.0, beta_star)), Direction.FORWARD, config.final)
    return HeteroclinicResult(
        p=params.p,
        bracket=bracket,
        beta_lo=lo,
        beta_hi=hi,
        beta_star=beta_star,
        interval_width=width,
        iterations=iterations,
        trajectory=trajectory,
        accepted_undecided=accepted_undecided,
    )


def extend_by_reflection(result):
    """
    Extend the forward connection to all eta by (x, y)(eta) = (-x(-eta), y(-eta)).

    x is odd and y even; dx/deta is even and dy/deta odd. The eta = 0 sample
    appears once.
    """
    f = result.trajectory if isinstance(result, HeteroclinicResult) else result
    if f.direction is not Direction.FORWARD or f.eta[0] != 0.0:
        raise ValidationError("Reflection needs a forward trajectory starting at eta = 0", keys=['trajectory'])
    return Trajectory(
        direction=Direction.FORWARD,
        eta=np.concatenate([-f.eta[:0:-1], f.eta]),
        x=np.concatenate([-f.x[:0:-1], f.x]),
        y=np.concatenate([f.y[:0:-1], f.y]),
        value=np.concatenate([f.value[:0:-1], f.value]),
        dx=np.concatenate([f.dx[:0:-1], f.dx]),
        dy=np.concatenate([-f.dy[:0:-1], f.dy]),
        events=(),
        status='reflected',
    )


def fit_tail(eta, x, x_eq, window=(3.0, 8.0), remove_growing_mode=True):
    """
    Fit x_eq - x ~ A eta^{-3} exp(-eta^2/4) over the window.

    Near x_eq the linearised equation z'' + eta z'/2 - z = 0 also has the
    growing solution eta^2 + 2; its coefficient is read off at the last
    sample and subtracted first. Non-positive residuals shrink the window to
    the part before the first of them.
    """
    eta = np.asarray(eta, dtype=float)
    z = x_eq - np.asarray(x, dtype=float)
    c = 0.0
    if remove_growing_mode:
        c = float(z[-1] / (eta[-1] ** 2 + 2.0))
        z = z - c * (eta ** 2 + 2.0)

    lo, hi = window
    mask = (eta >= lo) & (eta <= hi)
    shrunk = False
    bad = np.nonzero(mask & (z <= 0.0))[0]
    if len(bad):
        hi = float(eta[bad[0]])
        mask = (eta >= lo) & (eta < hi)
        shrunk = True
        logger.warning(f"Tail residual non-positive from eta={hi:.4g}; window shrunk to [{lo}, {hi:.4g})")
    if mask.sum() < 4:
        raise RankDeficientFit(f"Only {int(mask.sum())} tail samples in [{lo}, {hi}]")

    fit = gaussian_tail_lstsq(eta[mask], z[mask], TAIL_POWER)
    return TailFit(
        A_inf=math.exp(fit.log_amplitude),
        gaussian_slope=fit.gaussian_slope,
        log_correction=fit.power_slope,
        growing_mode=c,
        window=(lo, hi),
        n_points=fit.n_points,
        residual_rms=fit.residual_rms,
        shrunk=shrunk,
    )


def tail_fit(result, params, window=None):
    window = window or HeteroclinicConfig.tail_window
    traj = result.trajectory
    fit = fit_tail(traj.eta, traj.x, params.x_eq, window)
    logger.info(f"Tail fit: A_inf={fit.A_inf:.6g}, slope={fit.gaussian_slope:.4f} on "
                f"[{fit.window[0]}, {fit.window[1]:.4g}]")
    return fit


def construct_heteroclinic(params, config=None):
    """Bracket, bisect, reflect and fit the tail."""
    config = (config or HeteroclinicConfig()).validate()
    bracket = initial_bracket(params, config)
    result = bisect_beta(params, bracket, config.tol_beta, config)
    return replace(
        result,
        extended=extend_by_reflection(result),
        tail=tail_fit(result, params, config.tail_window),
    )


def beta_scan(params, betas, config=None, pool=None):
    """
    Classify every beta. With a multiprocessing pool the shots run in
    parallel; results keep the input order.
    """
    config = config or HeteroclinicConfig().shot
    jobs = [(params, float(beta), config) for beta in betas]
    if pool is not None:
        return pool.map(_scan_job, jobs)
    return [_scan_job(job) for job in jobs]


def _scan_job(job):
    params, beta, config = job
    return classify_shot(params, beta, config, keep_trajectory=False)


def count_transitions(outcomes):
    """Number of case II -> case I changes along a scan sorted by beta."""
    decided = [o.case for o in sorted(outcomes, key=lambda o: o.beta) if o.case is not ShotCase.UNDECIDED]
    return sum(1 for a, b in zip(decided, decided[1:]) if a is ShotCase.CASE_II and b is ShotCase.CASE_I)


def is_open_at(params, beta, rel=1e-6, config=None):
    """Whether beta * (1 -+ rel) classify like beta itself."""
    base = classify_shot(params, beta, config, keep_trajectory=False).case
    return all(
        classify_shot(params, beta * (1.0 + s * rel), config, keep_trajectory=False).case is base
        for s in (-1.0, 1.0)
    )


def trajectory_distance(a, b, eta_stop):
    """Sup-norm distance of two forward runs on [0, eta_stop], sampled at a's points."""
    mask = a.eta <= min(eta_stop, a.eta[-1], b.eta[-1])
    xb, yb = b.interpolate(a.eta[mask])
    return float(max(np.abs(a.x[mask] - xb).max(), np.abs(a.y[mask] - yb).max()))


def omega_violation(result, params):
    """
    Largest amount by which the beta* run leaves 0 < x < x_eq, 0 < y <= beta*
    on (0, horizon]. Bisection error grows along the mode eta^2 + 2, so the
    run exits Omega by roughly tol_beta * eta^2 near the horizon.
    """
    traj = result.trajectory
    mask = traj.eta > 0.0
    x, y = traj.x[mask], traj.y[mask]
    if not len(x):
        return 0.0
    return float(max(
        np.max(x - params.x_eq),
        np.max(-x),
        np.max(-y),
        np.max(y - result.beta_star),
        0.0,
    ))
