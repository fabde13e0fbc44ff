"""
Homoclinic connections to the origin and their decay.

Every zero-value (alpha, beta) inside the separatrix level V <= c_star (other
than the equilibria) launches a trajectory that stays in the level set of its
starting value for eta != 0 and converges to the origin in both directions.
This module constructs that two-parameter family, checks containment and
convergence, extracts the oscillatory envelope of the tail and fits it
against the Gaussian law A * eta^{-(1 + 2/(1-p))} * exp(-eta^2/4).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.special import dawsn

from exceptions import NotEnoughOscillations, ValidationError
from integrator import Direction, IntegratorConfig, integrate
from kernels import PhasePoint, gaussian_tail_lstsq, lyapunov_V, reaction_H_array

logger = logging.getLogger(__name__)

CONV_RADIUS = 1e-3
CONTAINMENT_TOL = 1e-8
SEED_TOL = 1e-12
MIN_ENVELOPE_POINTS = 4
MIN_FIT_POINTS = 6
ALGEBRAIC_EPSILON = 0.1


@dataclass(frozen=True)
class HomoclinicSeed:
    alpha: float
    beta: float

    def validate(self, params, tol=SEED_TOL):
        """Membership in the closed separatrix region minus the three equilibria."""
        a, b = self.alpha, self.beta
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValidationError(f"Seed ({a}, {b}) is not finite", keys=['seed'])
        if abs(a) <= tol and abs(b) <= tol:
            raise ValidationError("Seed (0, 0) is the trivial equilibrium", keys=['seed'])
        if abs(b) <= tol and abs(abs(a) - params.x_eq) <= tol:
            raise ValidationError(f"Seed ({a}, {b}) is the equilibrium (+-x_eq, 0)", keys=['seed'])
        if abs(a) > params.x_eq + tol:
            raise ValidationError(f"Seed ({a}, {b}) lies outside |x| <= x_eq", keys=['seed'])
        c_seed = lyapunov_V(params, (a, b))
        if c_seed > params.c_star + tol:
            raise ValidationError(
                f"Seed ({a}, {b}) has V={c_seed:.6g} above c_star={params.c_star:.6g}", keys=['seed']
            )
        return self

    def to_dict(self):
        return {'alpha': self.alpha, 'beta': self.beta}


@dataclass(frozen=True, eq=False)
class HomoclinicResult:
    seed: HomoclinicSeed
    c_seed: float
    forward: object
    backward: object
    F_limit_plus: float
    F_limit_minus: float
    converged_plus: bool
    converged_minus: bool
    max_containment_excess: float
    conv_radius: float = CONV_RADIUS

    @property
    def contained(self):
        return self.max_containment_excess <= CONTAINMENT_TOL

    def merged(self):
        """(eta, x, y) over both runs, eta increasing, origin sample once."""
        b, f = self.backward, self.forward
        eta = np.concatenate([b.eta[::-1][:-1], f.eta])
        x = np.concatenate([b.x[::-1][:-1], f.x])
        y = np.concatenate([b.y[::-1][:-1], f.y])
        return eta, x, y

    def to_dict(self):
        return {
            'seed': self.seed.to_dict(),
            'c_seed': self.c_seed,
            'converged_plus': self.converged_plus,
            'converged_minus': self.converged_minus,
            'F_limit_plus': self.F_limit_plus,
            'F_limit_minus': self.F_limit_minus,
            'max_containment_excess': self.max_containment_excess,
            'contained': self.contained,
            'conv_radius': self.conv_radius,
            'eta_max': float(self.forward.eta[-1]),
        }


def run_homoclinic(params, seed, config=None, conv_radius=CONV_RADIUS):
    """
    Integrate the seed forward and backward to +-eta_max.

    F_limit is estimated by V at the terminal sample; converged flags compare
    the terminal distance to the origin with conv_radius.
    """
    seed.validate(params)
    config = config or IntegratorConfig()
    start = (0.0, PhasePoint(seed.alpha, seed.beta))
    c_seed = lyapunov_V(params, start[1])

    forward = integrate(params, start, Direction.FORWARD, config)
    backward = integrate(params, start, Direction.BACKWARD, config)

    excess = max(float(forward.value.max()), float(backward.value.max())) - c_seed
    if excess > CONTAINMENT_TOL:
        logger.warning(f"Seed ({seed.alpha}, {seed.beta}) left its level set by {excess:.3e}")

    def converged(traj):
        return math.hypot(traj.x[-1], traj.y[-1]) < conv_radius

    result = HomoclinicResult(
        seed=seed,
        c_seed=c_seed,
        forward=forward,
        backward=backward,
        F_limit_plus=float(forward.value[-1]),
        F_limit_minus=float(backward.value[-1]),
        converged_plus=converged(forward),
        converged_minus=converged(backward),
        max_containment_excess=max(excess, 0.0),
        conv_radius=conv_radius,
    )
    logger.info(f"Homoclinic seed ({seed.alpha}, {seed.beta}): c_seed={c_seed:.6g}, "
                f"converged +/-: {result.converged_plus}/{result.converged_minus}")
    return result


def sample_seeds(params, n, rng_seed=0, level=0.9, min_radius=1e-6):
    """
    Rejection-sample n seeds with V(alpha, beta) <= level * c_star.

    level < 1 keeps seeds away from the saddles, where trajectories linger.
    """
    if not (0.0 < level <= 1.0):
        raise ValidationError(f"Seed level must lie in (0, 1], got {level}", keys=['seed_level'])
    rng = np.random.default_rng(rng_seed)
    y_box = math.sqrt(2.0 * params.c_star)
    seeds = []
    while len(seeds) < n:
        a = float(rng.uniform(-params.x_eq, params.x_eq))
        b = float(rng.uniform(-y_box, y_box))
        if math.hypot(a, b) < min_radius:
            continue
        if lyapunov_V(params, (a, b)) <= level * params.c_star:
            seeds.append(HomoclinicSeed(a, b))
    return seeds


def extract_envelope(traj, eta_start=3.0):
    """
    Successive local maxima of |x| beyond |eta| >= eta_start.

    Extrema of x sit at the zeros of y, located on the Hermite dense output.
    Returns a list of (|eta_k|, a_k) ordered by |eta|.
    """
    roots = np.asarray(traj.spline('y').roots(extrapolate=False), dtype=float)
    roots = roots[np.isfinite(roots)]
    roots = roots[np.abs(roots) >= eta_start]
    if len(roots):
        roots = roots[np.argsort(np.abs(roots))]
        keep = np.concatenate([[True], np.diff(np.abs(roots)) > 1e-12])
        roots = roots[keep]
    amplitudes = np.abs(traj.spline('x')(roots)) if len(roots) else np.array([])
    envelope = [(float(abs(e)), float(a)) for e, a in zip(roots, amplitudes) if a > 0.0]
    if len(envelope) < MIN_ENVELOPE_POINTS:
        raise NotEnoughOscillations(
            f"Found {len(envelope)} extrema beyond |eta|={eta_start}, need {MIN_ENVELOPE_POINTS}"
        )
    return envelope


@dataclass(frozen=True)
class DecayFit:
    gaussian_slope: float
    log_correction: float
    A_inf_estimate: float
    algebraic_exponent_check: Optional[float]
    window: tuple
    n_points: int
    residual_rms: float
    floor: float
    algebraic_ratio_pointwise: Optional[float] = None

    def to_dict(self):
        return {
            'gaussian_slope': self.gaussian_slope,
            'log_correction': self.log_correction,
            'A_inf': self.A_inf_estimate,
            'algebraic_ratio_local_sup': self.algebraic_exponent_check,
            'algebraic_ratio_pointwise': self.algebraic_ratio_pointwise,
            'window': list(self.window),
            'n_points': self.n_points,
            'residual_rms': self.residual_rms,
            'floor': self.floor,
        }


def envelope_power(params):
    """Power of eta in the amplitude law: 1 + 2/(1-p)."""
    return 1.0 + 2.0 / (1.0 - params.p)


def algebraic_ratio(traj, params, etas=(5.0, 10.0), epsilon=ALGEBRAIC_EPSILON, half_window=0.5):
    """
    r(eta) = |x| * (1 + eta)^{2/(1-p) - epsilon}; returns r(10)/r(5).

    With half_window > 0 |x| is the sup over [eta - half_window, eta + half_window],
    a local-sup variant that does not depend on the phase of the oscillation
    at eta; fit_decay uses it as algebraic_exponent_check. half_window = 0
    takes |x(eta)| itself from the dense output.
    """
    exponent = 2.0 / (1.0 - params.p) - epsilon
    abs_eta = np.abs(traj.eta)
    values = []
    for e in etas:
        if half_window > 0.0:
            mask = np.abs(abs_eta - e) <= half_window
            if not np.any(mask):
                return None
            amplitude = float(np.abs(traj.x[mask]).max())
        else:
            if e > abs_eta.max():
                return None
            amplitude = abs(float(traj.spline('x')(traj.direction.sign * e)))
        values.append(amplitude * (1.0 + e) ** exponent)
    if values[0] == 0.0:
        return 0.0 if values[1] == 0.0 else math.inf
    return values[1] / values[0]


def fit_decay(envelope, params, eta_min=3.0, eta_max=12.0, floor=0.0, traj=None):
    """
    Fit log a_k = log A - s eta^2/4 - k (1 + 2/(1-p)) log eta over the window
    [max(eta_min, first extremum), eta_max], using envelope points above floor.
    s and k are normalised (model value 1.0).
    """
    eta = np.array([e for e, _ in envelope], dtype=float)
    amp = np.array([a for _, a in envelope], dtype=float)
    lo = max(eta_min, float(eta.min())) if len(eta) else eta_min
    mask = (eta >= lo) & (eta <= eta_max) & (amp > floor)
    if mask.sum() < MIN_FIT_POINTS:
        raise NotEnoughOscillations(
            f"Only {int(mask.sum())} envelope points in [{lo}, {eta_max}] above {floor:.1e}"
        )
    fit = gaussian_tail_lstsq(eta[mask], amp[mask], envelope_power(params))
    ratio = algebraic_ratio(traj, params) if traj is not None else None
    pointwise = algebraic_ratio(traj, params, half_window=0.0) if traj is not None else None
    hi = float(eta[mask].max())
    logger.info(f"Decay fit on [{lo:.3g}, {hi:.3g}] ({fit.n_points} points): "
                f"slope={fit.gaussian_slope:.4f}, log-correction={fit.power_slope:.4f}")
    return DecayFit(
        gaussian_slope=fit.gaussian_slope,
        log_correction=fit.power_slope,
        A_inf_estimate=math.exp(fit.log_amplitude),
        algebraic_exponent_check=ratio,
        window=(lo, hi),
        n_points=fit.n_points,
        residual_rms=fit.residual_rms,
        floor=floor,
        algebraic_ratio_pointwise=pointwise,
    )


@dataclass(frozen=True)
class LqNorm:
    q: float
    value: float
    core: float
    tail: float
    below_guaranteed_range: bool
    tail_estimated: bool = False

    @property
    def tail_fraction(self):
        return self.tail / self.value if self.value > 0.0 else 0.0

    def to_dict(self):
        return {
            'q': self.q,
            'value': self.value,
            'core': self.core,
            'tail': self.tail,
            'tail_fraction': self.tail_fraction,
            'below_guaranteed_range': self.below_guaranteed_range,
            'tail_estimated': self.tail_estimated,
        }


def lq_norm(traj_pair, q, params, decay_fit=None):
    """
    ||w||_q^q over the real line: trapezoid over the computed range plus the
    fitted Gaussian envelope integrated beyond it on both sides.

    Without decay_fit the tail is left out and tail_estimated is False.
    Membership in L^q is guaranteed for q > (1-p)/2; smaller q is computed but
    flagged.
    """
    if q <= 0.0:
        raise ValidationError(f"q must be positive, got {q}", keys=['q'])
    if isinstance(traj_pair, HomoclinicResult):
        traj_pair = (traj_pair.forward, traj_pair.backward)

    core = 0.0
    ends = []
    for traj in traj_pair:
        order = np.argsort(traj.eta)
        core += float(trapezoid(np.abs(traj.x[order]) ** q, traj.eta[order]))
        ends.append(float(np.abs(traj.eta).max()))

    tail = 0.0
    if decay_fit is not None and core > 0.0:
        power = envelope_power(params) * decay_fit.log_correction
        slope = decay_fit.gaussian_slope
        amp = decay_fit.A_inf_estimate

        def integrand(e):
            return (amp * e ** -power * math.exp(-0.25 * slope * e * e)) ** q

        for end in ends:
            tail += quad(integrand, end, math.inf, limit=200)[0]

    guaranteed = q > 0.5 * (1.0 - params.p)
    if not guaranteed:
        logger.warning(f"q={q} is below the guaranteed range q > {(1.0 - params.p) / 2}")
    return LqNorm(q=q, value=core + tail, core=core, tail=tail, below_guaranteed_range=not guaranteed,
                  tail_estimated=decay_fit is not None)


def watson_ratio(eta):
    """
    int_0^eta exp(s^2/4) ds divided by its large-eta form (2/eta) exp(eta^2/4).

    The integral equals 2 exp(eta^2/4) D(eta/2) with Dawson's function D, so
    the ratio is eta * D(eta/2), which tends to 1.
    """
    eta = np.asarray(eta, dtype=float)
    return eta * dawsn(0.5 * eta)


@dataclass(frozen=True)
class BoundCheck:
    ok: bool
    worst_margin: float
    M_H: float

    def to_dict(self):
        return {'ok': self.ok, 'worst_margin': self.worst_margin, 'M_H': self.M_H}


def y_decay_bound_check(result, params, window=(5.0, 12.0)):
    """|y| <= |beta| exp(-eta^2/4) + 4 M_H / eta on the window, both sides."""
    eta, x, y = result.merged()
    M_H = float(np.abs(reaction_H_array(params, x)).max())
    a = np.abs(eta)
    mask = (a >= window[0]) & (a <= window[1])
    bound = abs(result.seed.beta) * np.exp(-0.25 * a[mask] ** 2) + 4.0 * M_H / a[mask]
    margin = bound - np.abs(y[mask])
    worst = float(margin.min()) if margin.size else math.inf
    return BoundCheck(ok=worst >= 0.0, worst_margin=worst, M_H=M_H)


def derivative_decay_profile(result, split=6.0):
    """
    sup |y| (1 + |eta|) on |eta| <= split and beyond it; the bound |y| <= c/(1+|eta|)
    is consistent when the outer sup does not exceed the inner one.
    """
    eta, _, y = result.merged()
    weighted = np.abs(y) * (1.0 + np.abs(eta))
    inner = float(weighted[np.abs(eta) <= split].max())
    outer = float(weighted[np.abs(eta) > split].max())
    return inner, outer


def small_amplitude_entry(traj, params):
    """
    First |eta| after which |x| stays below (2p(1-p)/(1+p))^{1/(1-p)}, or None.
    """
    p = params.p
    bound = (2.0 * p * (1.0 - p) / (1.0 + p)) ** (1.0 / (1.0 - p))
    above = np.nonzero(np.abs(traj.x) > bound)[0]
    if len(above) == 0:
        return float(abs(traj.eta[0]))
    last = above[-1]
    if last + 1 >= len(traj.eta):
        return None
    return float(abs(traj.eta[last + 1]))


def sign_changes(traj):
    s = np.sign(traj.x)
    s = s[s != 0]
    return int(np.count_nonzero(np.diff(s)))


def symmetry_defect(result):
    """
    Mirror defects between the backward and forward runs on matched samples:
    (even, odd) = (max|x(-eta) - x(eta)|, max|x(-eta) + x(eta)|), with the
    matching y defects folded in.
    """
    f, b = result.forward, result.backward
    n = min(len(f), len(b))
    if not np.allclose(f.eta[:n], -b.eta[:n], rtol=0.0, atol=1e-12):
        logger.warning("Forward and backward samples are not mirrored; comparing by interpolation")
        bx, by = b.interpolate(-f.eta)
        fx, fy = f.x, f.y
    else:
        bx, by, fx, fy = b.x[:n], b.y[:n], f.x[:n], f.y[:n]
    even = float(max(np.nanmax(np.abs(bx - fx)), np.nanmax(np.abs(by + fy))))
    odd = float(max(np.nanmax(np.abs(bx + fx)), np.nanmax(np.abs(by - fy))))
    return even, odd
