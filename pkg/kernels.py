"""
Scalar kernels of the self-similar reduction.

For 0 < p < 1 the similarity ansatz u(x, t) = t^{1/(1-p)} w(x / sqrt(t)) turns
u_t - u_xx = u|u|^{p-1} into the planar, non-autonomous, non-Lipschitz system

    x' = y
    y' = H(x) - eta * y / 2,      H(x) = x / (1-p) - x|x|^{p-1}

This module holds the reaction term H, the Lyapunov function V, the level-set
geometry of V inside the separatrix through (+-x_eq, 0), and the constants
derived from p. Everything here is pure; other modules import from it.
"""

import enum
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from exceptions import ConsistencyError, LevelCurveError, RankDeficientFit, ValidationError

logger = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-9
M_H_CHECK_TOL = 1e-10


class PhasePoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class ProblemParams:
    """
    The exponent p and the constants derived from it.

    Attributes:
        p (float): exponent of the nonlinearity, 0 < p < 1
        x_eq (float): abscissa of the non-trivial equilibria, (1-p)^{1/(1-p)}
        c_star (float): value of V on the separatrix through (+-x_eq, 0)
        m_H (float): infimum of H on [0, x_eq]
        lambda_min (float): argmin of H on [0, x_eq]
    """

    p: float
    x_eq: float
    c_star: float
    m_H: float
    lambda_min: float

    @property
    def growth_exponent(self):
        """1/(1-p): the power of t in the similarity ansatz."""
        return 1.0 / (1.0 - self.p)

    def to_dict(self):
        return {
            'p': self.p,
            'x_eq': self.x_eq,
            'c_star': self.c_star,
            'm_H': self.m_H,
            'lambda_min': self.lambda_min,
        }


class Membership(str, enum.Enum):
    INSIDE = 'inside'
    ON = 'on'
    OUTSIDE = 'outside'


def signed_power(x, p):
    """sign(x)|x|^p with the value 0 at x = 0."""
    if x == 0.0:
        return 0.0
    return math.copysign(abs(x) ** p, x)


def signed_power_array(x, p):
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** p


def validate_exponent(p, allow_one=False):
    upper_ok = p <= 1.0 if allow_one else p < 1.0
    if not (isinstance(p, (int, float)) and math.isfinite(p) and p > 0.0 and upper_ok):
        bound = '(0, 1]' if allow_one else '(0, 1)'
        raise ValidationError(f"Exponent p must lie in {bound}, got {p!r}", keys=['p'])


def _H(p, x):
    return x / (1.0 - p) - signed_power(x, p)


def _grid_minimum_of_H(p, x_eq, n=100001, zoom=10001):
    """Two-level grid minimisation of H over [0, x_eq]."""
    grid = np.linspace(0.0, x_eq, n)
    values = grid / (1.0 - p) - grid ** p
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, n - 1)]
    fine = np.linspace(lo, hi, zoom)
    fine_values = fine / (1.0 - p) - fine ** p
    return float(fine_values.min())


@lru_cache(maxsize=256)
def derived_constants(p):
    """
    Build ProblemParams for the exponent p.

    x_eq and c_star are closed forms; lambda_min solves H'(lambda) = 0 in
    closed form and m_H = H(lambda_min). The closed form for m_H is
    cross-checked against grid minimisation of H on [0, x_eq].
    """
    validate_exponent(p)
    p = float(p)
    x_eq = (1.0 - p) ** (1.0 / (1.0 - p))
    c_star = (1.0 - p) ** (2.0 / (1.0 - p)) / (2.0 * (1.0 + p))
    lambda_min = (p * (1.0 - p)) ** (1.0 / (1.0 - p))
    if not (x_eq > 0.0 and c_star > 0.0 and lambda_min > 0.0):
        raise ValidationError(f"p={p} is too close to 1: x_eq={x_eq!r}, c_star={c_star!r} underflow", keys=['p'])
    m_H = _H(p, lambda_min)

    m_grid = _grid_minimum_of_H(p, x_eq)
    if abs(m_grid - m_H) > M_H_CHECK_TOL:
        logger.error(f"m_H closed form {m_H!r} disagrees with grid minimum {m_grid!r} for p={p}")
        raise ConsistencyError(f"m_H cross-check failed for p={p}: {m_H} vs {m_grid}")

    logger.debug(f"Derived constants for p={p}: x_eq={x_eq}, c_star={c_star}, m_H={m_H}")
    return ProblemParams(p=p, x_eq=x_eq, c_star=c_star, m_H=m_H, lambda_min=lambda_min)


def reaction_H(params, x):
    """H(x) = x/(1-p) - sign(x)|x|^p; continuous, odd, zero at 0 and +-x_eq."""
    return _H(params.p, x)


def reaction_H_array(params, x):
    x = np.asarray(x, dtype=float)
    return x / (1.0 - params.p) - signed_power_array(x, params.p)


def lyapunov_V(params, pt):
    """V(x, y) = y^2/2 - x^2/(2(1-p)) + |x|^{1+p}/(1+p)."""
    x, y = pt
    p = params.p
    return 0.5 * y * y - x * x / (2.0 * (1.0 - p)) + abs(x) ** (1.0 + p) / (1.0 + p)


def lyapunov_V_array(params, x, y):
    p = params.p
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 0.5 * y * y - x * x / (2.0 * (1.0 - p)) + np.abs(x) ** (1.0 + p) / (1.0 + p)


def grad_V(params, pt):
    """Gradient of V: (-H(x), y)."""
    x, y = pt
    return (-_H(params.p, x), y)


def rhs_Q(params, eta, pt):
    """The vector field Q(x, y, eta) = (y, H(x) - eta y / 2)."""
    x, y = pt
    return (y, _H(params.p, x) - 0.5 * eta * y)


def phase_rhs(params):
    """Closure over p returning Q as f(eta, x, y) -> (x', y') for the integrator."""
    p = params.p
    k = 1.0 / (1.0 - p)
    copysign = math.copysign

    def f(eta, x, y):
        if x == 0.0:
            return (y, -0.5 * eta * y)
        return (y, k * x - copysign(abs(x) ** p, x) - 0.5 * eta * y)

    return f


def phase_value(params):
    """Closure returning V(x, y) for per-sample bookkeeping."""
    p = params.p
    a = 1.0 / (2.0 * (1.0 - p))
    b = 1.0 / (1.0 + p)
    q = 1.0 + p

    def v(x, y):
        return 0.5 * y * y - a * x * x + b * abs(x) ** q

    return v


def equilibria(params):
    """Equilibria of the phase system: the origin and (+-x_eq, 0)."""
    return (PhasePoint(0.0, 0.0), PhasePoint(params.x_eq, 0.0), PhasePoint(-params.x_eq, 0.0))


def u_plus(params, t):
    """Maximal solution ((1-p)t)^{1/(1-p)} of the Cauchy problem, t >= 0."""
    t = np.maximum(np.asarray(t, dtype=float), 0.0)
    return ((1.0 - params.p) * t) ** params.growth_exponent


def u_minus(params, t):
    return -u_plus(params, t)


def zero_level_root(params):
    """Positive root of V(x, 0) = 0: x0 = (2(1-p)/(1+p))^{1/(1-p)}."""
    p = params.p
    return (2.0 * (1.0 - p) / (1.0 + p)) ** (1.0 / (1.0 - p))


def _validate_level(params, c):
    if not (0.0 <= c <= params.c_star):
        raise ValidationError(
            f"Level c={c!r} outside [0, c_star={params.c_star!r}] for p={params.p}", keys=['c']
        )


def level_membership(params, pt, c, tol=MEMBERSHIP_TOL):
    """
    Classify pt against the level set V = c restricted to the bounded region
    enclosed by the separatrix (|x| <= x_eq).
    """
    _validate_level(params, c)
    if abs(pt[0]) > params.x_eq:
        return Membership.OUTSIDE
    value = lyapunov_V(params, pt)
    if abs(value - c) <= tol:
        return Membership.ON
    return Membership.INSIDE if value < c else Membership.OUTSIDE


def level_half_width(params, c):
    """Positive x where the closed level curve V = c meets the x-axis."""
    _validate_level(params, c)
    if c == 0.0:
        return 0.0
    if c >= params.c_star:
        return params.x_eq

    def g(x):
        return lyapunov_V(params, (x, 0.0)) - c

    try:
        return brentq(g, 0.0, params.x_eq, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    except ValueError as e:
        logger.error(f"Root-finding for the axis crossing of V={c} failed: {str(e)}")
        raise LevelCurveError(f"axis crossing of V={c} not bracketed", slice_x=None) from e


def level_curve_sample(params, c, n):
    """
    Sample n points of the closed level curve V = c inside the separatrix.

    Slices are vertical (x = const); on each slice the positive y with
    V(x, y) = c is found by bracketed root-finding. The polyline runs
    counterclockwise from (x_c, 0) back to (x_c, 0). For c = 0 the curve
    degenerates to the origin and a single point is returned.
    """
    _validate_level(params, c)
    if c == 0.0:
        return [PhasePoint(0.0, 0.0)]
    if n < 8:
        raise ValidationError(f"Level curves need at least 8 points, got {n}", keys=['n'])

    x_c = level_half_width(params, c)
    y_top = math.sqrt(2.0 * c) * 1.01 + 1e-300
    points = []
    for theta in np.linspace(0.0, 2.0 * math.pi, n):
        x = x_c * math.cos(theta)
        s = math.sin(theta)
        base = lyapunov_V(params, (x, 0.0)) - c
        if base >= 0.0 or abs(s) < 1e-15:
            y = 0.0
        else:
            try:
                y = brentq(lambda yy: lyapunov_V(params, (x, yy)) - c, 0.0, y_top, xtol=1e-15)
            except ValueError as e:
                logger.error(f"Level curve slice x={x} failed for c={c}: {str(e)}")
                raise LevelCurveError(f"no root on slice x={x} for c={c}", slice_x=x) from e
        points.append(PhasePoint(x, math.copysign(y, s) if y else 0.0))
    return points


class GaussianTailFit(NamedTuple):
    log_amplitude: float
    gaussian_slope: float
    power_slope: float
    residual_rms: float
    n_points: int


def gaussian_tail_lstsq(eta, values, power, fit_power=True):
    """
    Least squares for log v = log A - s * eta^2/4 - k * power * log(eta).

    With the model exponents s = k = 1 the fit returns gaussian_slope and
    power_slope normalised to 1.0. With fit_power=False, k is held at 1.
    """
    eta = np.asarray(eta, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0.0) or np.any(eta <= 0.0):
        raise RankDeficientFit("Gaussian tail fit needs positive eta and values")

    rhs = np.log(values)
    columns = [np.ones_like(eta), -0.25 * eta ** 2]
    if fit_power:
        columns.append(-power * np.log(eta))
    else:
        rhs = rhs + power * np.log(eta)
    design = np.column_stack(columns)
    if len(eta) < design.shape[1] + 1:
        raise RankDeficientFit(f"Only {len(eta)} points for a {design.shape[1]}-parameter fit")

    coef, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=None)
    if rank < design.shape[1]:
        raise RankDeficientFit(f"Design matrix rank {rank} < {design.shape[1]}")
    residual = rhs - design @ coef
    return GaussianTailFit(
        log_amplitude=float(coef[0]),
        gaussian_slope=float(coef[1]),
        power_slope=float(coef[2]) if fit_power else 1.0,
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        n_points=int(len(eta)),
    )


def level_outer_branch(params, c, x_max, n=200):
    """
    Upper half of the unbounded V = c branch for x_eq <= x <= x_max.

    Only drawn in figures; no logic uses the region outside the separatrix.
    """
    p = params.p
    x = np.linspace(params.x_eq, x_max, n)
    y2 = 2.0 * (c + x * x / (2.0 * (1.0 - p)) - x ** (1.0 + p) / (1.0 + p))
    keep = y2 >= 0.0
    return x[keep], np.sqrt(y2[keep])
