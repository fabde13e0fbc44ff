"""
Self-similar solutions u(x, t) = (t - tau)^{1/(1-p)} w((x - x0)/sqrt(t - tau))
of u_t - u_xx = u|u|^{p-1}, their finite-difference residual, and a
method-of-lines evolution used to cross-check them.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from scipy.interpolate import CubicHermiteSpline

from exceptions import NonFiniteState, ValidationError
from heteroclinic import extend_by_reflection
from homoclinic import run_homoclinic
from integrator import Direction, IntegratorConfig, integrate
from kernels import PhasePoint, reaction_H_array, signed_power_array, u_plus

logger = logging.getLogger(__name__)

PROFILE_H_MAX = 2e-3
SMOOTH_FRACTION = 0.25
SMOOTH_MARGIN = 0.5
BOUND_TOL = 1e-8
# |u| below this sees no reaction during evolution; exact zeros otherwise
# take off from roundoff leakage along the non-unique branch
REACTION_FLOOR = 1e-14


class ProfileKind(str, enum.Enum):
    HOMOCLINIC = 'homoclinic'
    FRONT = 'front'
    HOMOGENEOUS = 'homogeneous'


class BoundaryCondition(str, enum.Enum):
    ZERO = 'zero'
    SELF_SIMILAR_FRONT = 'self_similar_front'


@dataclass(frozen=True, eq=False)
class SelfSimilarProfile:
    """
    w(eta) on a sampled range, cubic Hermite between samples.

    Beyond the samples a homoclinic profile is 0 (its envelope is below
    1e-30 there), a front follows its fitted tail
    sign(eta) (x_eq - A |eta|^{-k} exp(-s eta^2/4)), and the homogeneous
    profile is the constant x_eq.
    """

    kind: ProfileKind
    params: object
    eta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    w: np.ndarray = field(default_factory=lambda: np.zeros(0))
    wp: np.ndarray = field(default_factory=lambda: np.zeros(0))
    wpp: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tail: Optional[object] = None
    label: str = ''
    _splines: dict = field(default_factory=dict, repr=False)

    @property
    def eta_data_max(self):
        if self.kind is ProfileKind.HOMOGENEOUS:
            return math.inf
        return float(min(-self.eta[0], self.eta[-1]))

    def _spline(self, name):
        if name not in self._splines:
            if name == 'w':
                self._splines[name] = CubicHermiteSpline(self.eta, self.w, self.wp, extrapolate=False)
            else:
                self._splines[name] = CubicHermiteSpline(self.eta, self.wp, self.wpp, extrapolate=False)
        return self._splines[name]

    def _tail_parts(self, eta):
        a = np.abs(eta)
        fit = self.tail
        power = 3.0 * fit.log_correction
        g = fit.A_inf * a ** -power * np.exp(-0.25 * fit.gaussian_slope * a * a)
        return a, g, power

    def w_at(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.kind is ProfileKind.HOMOGENEOUS:
            return np.full_like(eta, self.params.x_eq)
        inside = (eta >= self.eta[0]) & (eta <= self.eta[-1])
        out = np.zeros_like(eta)
        out[inside] = self._spline('w')(eta[inside])
        if self.kind is ProfileKind.FRONT and np.any(~inside):
            _, g, _ = self._tail_parts(eta[~inside])
            out[~inside] = np.sign(eta[~inside]) * (self.params.x_eq - g)
        return out

    def wp_at(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.kind is ProfileKind.HOMOGENEOUS:
            return np.zeros_like(eta)
        inside = (eta >= self.eta[0]) & (eta <= self.eta[-1])
        out = np.zeros_like(eta)
        out[inside] = self._spline('wp')(eta[inside])
        if self.kind is ProfileKind.FRONT and np.any(~inside):
            a, g, power = self._tail_parts(eta[~inside])
            out[~inside] = g * (power / a + 0.5 * self.tail.gaussian_slope * a)
        return out

    def wpp_at(self, eta):
        """w'' from the profile equation: H(w) - eta w'/2."""
        eta = np.asarray(eta, dtype=float)
        return reaction_H_array(self.params, self.w_at(eta)) - 0.5 * eta * self.wp_at(eta)

    def to_dict(self):
        return {
            'kind': self.kind.value,
            'p': self.params.p,
            'label': self.label,
            'eta_data_max': None if self.kind is ProfileKind.HOMOGENEOUS else self.eta_data_max,
            'tail': self.tail.to_dict() if self.tail is not None else None,
        }


def _profile_from_arrays(kind, params, eta, w, wp, tail=None, label=''):
    wpp = reaction_H_array(params, w) - 0.5 * eta * wp
    if np.any(np.abs(w) > params.x_eq + BOUND_TOL):
        logger.warning(f"{kind.value} profile exceeds x_eq by {np.abs(w).max() - params.x_eq:.3e}")
    return SelfSimilarProfile(kind=kind, params=params, eta=eta, w=w, wp=wp, wpp=wpp, tail=tail, label=label)


def profile_from_homoclinic(params, seed, eta_max=12.0, h_max=PROFILE_H_MAX):
    """Re-run the seed with a fine step cap so the Hermite profile is resolved for second differences."""
    config = IntegratorConfig(h_max=h_max, eta_max=eta_max)
    result = run_homoclinic(params, seed, config)
    eta, x, y = result.merged()
    return _profile_from_arrays(ProfileKind.HOMOCLINIC, params, eta, x, y,
                                label=f"homoclinic({seed.alpha}, {seed.beta})")


def profile_from_heteroclinic(params, result, eta_cut=None, h_max=PROFILE_H_MAX):
    """
    The odd front through (0, beta_star), cut at the end of the tail-fit
    window and continued by the fitted tail beyond it.
    """
    if result.tail is None:
        raise ValidationError("Front profile needs a heteroclinic result with a tail fit", keys=['tail'])
    eta_cut = eta_cut or result.tail.window[1]
    config = IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15, h_max=h_max, eta_max=eta_cut)
    forward = integrate(params, (0.0, PhasePoint(0.0, result.beta_star)), Direction.FORWARD, config)
    full = extend_by_reflection(forward)
    return _profile_from_arrays(ProfileKind.FRONT, params, full.eta, full.x, full.y, tail=result.tail,
                                label=f"front(beta*={result.beta_star:.12g})")


def homogeneous_profile(params):
    """w = x_eq, which reproduces u+(t) = ((1-p) t)^{1/(1-p)}."""
    return SelfSimilarProfile(kind=ProfileKind.HOMOGENEOUS, params=params, label='homogeneous')


def eval_self_similar(profile, x, t, x0=0.0, tau=0.0):
    """u(x, t); zero for t <= tau."""
    x = np.asarray(x, dtype=float)
    s = t - tau
    if s <= 0.0:
        return np.zeros_like(x)
    root = math.sqrt(s)
    return s ** profile.params.growth_exponent * profile.w_at((x - x0) / root)


def analytic_derivatives(profile, x, t, x0=0.0, tau=0.0):
    """
    (u_x, u_t, u_xx) from w, w', w'':
    u_x = s^{k-1/2} w', u_t = s^{k-1} (k w - eta w'/2), u_xx = s^{k-1} w''.
    """
    x = np.asarray(x, dtype=float)
    s = t - tau
    if s <= 0.0:
        raise ValidationError(f"Derivatives need t > tau, got t={t}, tau={tau}", keys=['t'])
    k = profile.params.growth_exponent
    eta = (x - x0) / math.sqrt(s)
    w, wp = profile.w_at(eta), profile.wp_at(eta)
    u_x = s ** (k - 0.5) * wp
    u_t = s ** (k - 1.0) * (k * w - 0.5 * eta * wp)
    u_xx = s ** (k - 1.0) * profile.wpp_at(eta)
    return u_x, u_t, u_xx


@dataclass(frozen=True)
class Grid:
    L: float
    nx: int
    t0: float
    t1: float
    cfl: float = 0.4

    def validate(self):
        bad = []
        if not (self.L > 0.0):
            bad.append('L')
        if self.nx < 64 or self.nx % 2 == 0:
            bad.append('nx')
        if not (0.0 < self.t0 < self.t1):
            bad.append('t0')
        if not (0.0 < self.cfl <= 0.5):
            bad.append('cfl')
        if bad:
            raise ValidationError(f"Invalid grid: {', '.join(bad)}", keys=bad)
        return self

    @property
    def x(self):
        return np.linspace(-self.L, self.L, self.nx)

    @property
    def dx(self):
        return 2.0 * self.L / (self.nx - 1)

    def refined(self):
        return Grid(L=self.L, nx=2 * (self.nx - 1) + 1, t0=self.t0, t1=self.t1, cfl=self.cfl)

    def to_dict(self):
        return {'L': self.L, 'nx': self.nx, 't0': self.t0, 't1': self.t1, 'cfl': self.cfl}


@dataclass(frozen=True, eq=False)
class Field:
    time: float
    x: np.ndarray
    u: np.ndarray
    max_bound_excess: float = 0.0
    steps: int = 0

    @property
    def two_signed(self):
        return bool(self.u.max() > 0.0 and self.u.min() < 0.0)

    def to_frame(self):
        return pd.DataFrame({'x': self.x, 'u': self.u})


def exact_field(profile, grid, t, x0=0.0, tau=0.0):
    x = grid.x
    return Field(time=t, x=x, u=eval_self_similar(profile, x, t, x0, tau))


def bound_excess(params, u, t):
    """max(|u| - u+(t)); positive values violate u- <= u <= u+."""
    return float(np.max(np.abs(u)) - u_plus(params, t))


@dataclass(frozen=True)
class ResidualReport:
    max_abs_residual: float
    interior_norms: dict
    ux_error: float
    ut_error: float
    dx: float
    n_smooth: int

    def to_dict(self):
        return {
            'max_abs_residual': self.max_abs_residual,
            'interior_norms': dict(self.interior_norms),
            'ux_error': self.ux_error,
            'ut_error': self.ut_error,
            'dx': self.dx,
            'n_smooth': self.n_smooth,
        }


def pde_residual(profile, grid, x0=0.0, tau=0.0):
    """
    |u_t - u_xx - u|u|^{p-1}| at the interior points at t0, second-order central
    differences in x and in t (with dt = dx).

    The smooth-region norms keep points with |u| >= 0.25 max|u| inside the
    sampled eta range; w'' is only Hoelder-p continuous where w = 0, so the
    differences converge at second order away from the zeros only.
    """
    grid.validate()
    dx = grid.dx
    t0 = grid.t0
    if t0 - tau <= dx:
        raise ValidationError(f"t0 - tau must exceed dx={dx} for the time difference", keys=['t0'])
    p = profile.params.p
    x = grid.x

    u = eval_self_similar(profile, x, t0, x0, tau)
    u_next = eval_self_similar(profile, x, t0 + dx, x0, tau)
    u_prev = eval_self_similar(profile, x, t0 - dx, x0, tau)

    u_xx = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx)
    u_x = (u[2:] - u[:-2]) / (2.0 * dx)
    u_t = (u_next[1:-1] - u_prev[1:-1]) / (2.0 * dx)
    interior = u[1:-1]
    residual = np.abs(u_t - u_xx - signed_power_array(interior, p))

    ux_exact, ut_exact, _ = analytic_derivatives(profile, x[1:-1], t0, x0, tau)
    eta = (x[1:-1] - x0) / math.sqrt(t0 - tau)
    scale = np.abs(interior).max()
    smooth = (np.abs(interior) >= SMOOTH_FRACTION * scale) & (np.abs(eta) <= profile.eta_data_max - SMOOTH_MARGIN)
    if not np.any(smooth):
        logger.warning("No smooth interior points for the residual norms")
        smooth_max = smooth_l2 = ux_err = ut_err = 0.0
    else:
        smooth_max = float(residual[smooth].max())
        smooth_l2 = float(math.sqrt(dx * np.sum(residual[smooth] ** 2)))
        ux_err = float(np.abs(u_x - ux_exact)[smooth].max())
        ut_err = float(np.abs(u_t - ut_exact)[smooth].max())

    report = ResidualReport(
        max_abs_residual=float(residual.max()),
        interior_norms={
            'max': float(residual.max()),
            'l2': float(math.sqrt(dx * np.sum(residual ** 2))),
            'smooth_max': smooth_max,
            'smooth_l2': smooth_l2,
        },
        ux_error=ux_err,
        ut_error=ut_err,
        dx=dx,
        n_smooth=int(smooth.sum()),
    )
    logger.debug(f"Residual for {profile.label} at nx={grid.nx}: max={report.max_abs_residual:.3e}, "
                 f"smooth max={smooth_max:.3e}")
    return report


@dataclass(frozen=True)
class ConvergenceReport:
    coarse: ResidualReport
    fine: ResidualReport

    @property
    def ratio(self):
        fine = self.fine.interior_norms['smooth_max']
        if fine == 0.0:
            return math.inf
        return self.coarse.interior_norms['smooth_max'] / fine

    def to_dict(self):
        return {
            'nx_coarse_dx': self.coarse.dx,
            'nx_fine_dx': self.fine.dx,
            'coarse_smooth_max': self.coarse.interior_norms['smooth_max'],
            'fine_smooth_max': self.fine.interior_norms['smooth_max'],
            'ratio': self.ratio,
        }


def convergence_ratio(profile, grid, x0=0.0, tau=0.0):
    """Smooth-region residual on grid divided by the one with dx halved."""
    coarse = pde_residual(profile, grid, x0, tau)
    fine = pde_residual(profile, grid.refined(), x0, tau)
    report = ConvergenceReport(coarse=coarse, fine=fine)
    logger.info(f"Residual convergence for {profile.label}: ratio {report.ratio:.3f}")
    return report


def evolve(initial, grid, bc, params, profile=None, x0=0.0, tau=0.0, reaction_floor=REACTION_FLOOR):
    """
    Method of lines from initial.time to grid.t1: second-order central
    differences in x, classical RK4 in t with dt <= cfl dx^2.

    Boundary values are 0 (bc=zero) or the self-similar field at x = +-L at
    each stage time (bc=self_similar_front). The largest excess of |u| over
    u+(t) over all steps is recorded on the returned Field.
    """
    grid.validate()
    bc = BoundaryCondition(bc)
    if bc is BoundaryCondition.SELF_SIMILAR_FRONT and profile is None:
        raise ValidationError("Self-similar boundary values need a profile", keys=['profile'])
    if len(initial.u) != grid.nx:
        raise ValidationError(f"Initial field has {len(initial.u)} points, grid has {grid.nx}", keys=['nx'])

    p = params.p
    dx = grid.dx
    inv_dx2 = 1.0 / (dx * dx)
    t = float(initial.time)
    span = grid.t1 - t
    if span <= 0.0:
        raise ValidationError(f"Initial time {t} is not before t1={grid.t1}", keys=['t1'])
    n_steps = int(math.ceil(span / (grid.cfl * dx * dx)))
    dt = span / n_steps
    edges = np.array([-grid.L, grid.L])

    def boundary(time):
        if bc is BoundaryCondition.ZERO:
            return 0.0, 0.0
        left, right = eval_self_similar(profile, edges, time, x0, tau)
        return float(left), float(right)

    def rhs(v, time):
        left, right = boundary(time)
        full = np.concatenate(([left], v, [right]))
        react = signed_power_array(v, p)
        if reaction_floor > 0.0:
            react[np.abs(v) < reaction_floor] = 0.0
        return (full[2:] - 2.0 * full[1:-1] + full[:-2]) * inv_dx2 + react

    v = np.array(initial.u[1:-1], dtype=float)
    worst = bound_excess(params, initial.u, t)
    logger.info(f"Evolving {grid.nx} points from t={t} to t={grid.t1} in {n_steps} steps (dt={dt:.3e})")
    for step in range(n_steps):
        k1 = rhs(v, t)
        k2 = rhs(v + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(v + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(v + dt * k3, t + dt)
        v = v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = grid.t1 if step == n_steps - 1 else t + dt
        if not np.all(np.isfinite(v)):
            logger.error(f"Non-finite field at t={t} after {step + 1} steps")
            raise NonFiniteState(f"non-finite field at t={t}", t, None)
        worst = max(worst, bound_excess(params, v, t))

    left, right = boundary(grid.t1)
    u = np.concatenate(([left], v, [right]))
    if worst > BOUND_TOL:
        logger.warning(f"|u| exceeded u+(t) by {worst:.3e} during evolution")
    return Field(time=grid.t1, x=grid.x, u=u, max_bound_excess=worst, steps=n_steps)


@dataclass(frozen=True)
class ErrorNorms:
    sup: float
    l2: float
    rel_sup: float

    def to_dict(self):
        return {'sup': self.sup, 'l2': self.l2, 'rel_sup': self.rel_sup}


def compare_self_similar(evolved, profile, t1=None, x0=0.0, tau=0.0):
    """Sup, discrete L2 and relative sup norms of evolved - u(., t1)."""
    t1 = evolved.time if t1 is None else t1
    exact = eval_self_similar(profile, evolved.x, t1, x0, tau)
    err = evolved.u - exact
    dx = float(evolved.x[1] - evolved.x[0])
    sup = float(np.abs(err).max())
    scale = float(np.abs(exact).max())
    return ErrorNorms(
        sup=sup,
        l2=float(math.sqrt(dx * np.sum(err ** 2))),
        rel_sup=sup / scale if scale > 0.0 else sup,
    )


def front_limit_gap(profile, L, t):
    """u(+-L, t) -+ u+(t); both vanish as L grows for a front."""
    left, right = eval_self_similar(profile, np.array([-L, L]), t)
    bound = float(u_plus(profile.params, t))
    return float(left + bound), float(right - bound)
