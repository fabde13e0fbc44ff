"""
Adaptive Dormand-Prince 5(4) integration of planar systems in either direction.

The core `solve` integrates any planar right-hand side f(eta, x, y) -> (x', y')
and is used both for the self-similar phase system and for the autonomous
oscillator of the averaging analysis. `integrate` is the phase-system entry
point.

Backward runs are carried out in the reversed variable s = -eta with the
transformed field -f(-s, x, y); the stepper itself only ever moves forward.
Dense output is cubic Hermite on accepted steps; event locations are refined
by bisection on it.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import pandas as pd
from scipy.interpolate import CubicHermiteSpline

from exceptions import NonFiniteState, StepBudgetExceeded, StepUnderflow, ValidationError
from kernels import phase_rhs, phase_value

logger = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# b - b_hat
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class Direction(str, enum.Enum):
    FORWARD = 'forward'
    BACKWARD = 'backward'

    @property
    def sign(self):
        return 1.0 if self is Direction.FORWARD else -1.0


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 0.1
    eta_max: float = 12.0
    event_tol: float = 1e-10
    max_steps: int = 5_000_000

    def validate(self):
        bad = []
        for name in ('rel_tol', 'abs_tol', 'h_init', 'h_min', 'h_max', 'eta_max', 'event_tol'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                bad.append(name)
        if self.h_min > self.h_max:
            bad.append('h_min')
        if self.max_steps <= 0:
            bad.append('max_steps')
        if bad:
            raise ValidationError(f"Invalid integrator settings: {', '.join(bad)}", keys=bad)
        return self

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class EventSpec:
    """
    A scalar function g(eta, x, y) watched for zero crossings.

    direction: +1 rising, -1 falling, 0 either; taken along the order in which
    the trajectory is traversed.
    """

    name: str
    fn: Callable[[float, float, float], float]
    direction: int = 0
    terminal: bool = False


@dataclass(frozen=True)
class EventHit:
    name: str
    eta: float
    x: float
    y: float
    residual: float = 0.0

    def to_dict(self):
        return {'name': self.name, 'eta': self.eta, 'x': self.x, 'y': self.y}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Ordered samples of a solution.

    eta is strictly monotone in the stated direction; value holds V (or the
    oscillator energy) at each sample; dx, dy are the field values (d/d eta)
    used by the Hermite interpolant.
    """

    direction: Direction
    eta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    value: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    events: tuple = ()
    status: str = 'horizon'
    _splines: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self):
        return len(self.eta)

    @property
    def terminal(self):
        return (float(self.eta[-1]), float(self.x[-1]), float(self.y[-1]))

    @property
    def samples(self):
        return list(zip(self.eta.tolist(), self.x.tolist(), self.y.tolist(), self.value.tolist()))

    def events_named(self, name):
        return [hit for hit in self.events if hit.name == name]

    def _ordered(self):
        if self.direction is Direction.FORWARD:
            return self.eta, self.x, self.y, self.dx, self.dy
        return self.eta[::-1], self.x[::-1], self.y[::-1], self.dx[::-1], self.dy[::-1]

    def spline(self, component):
        """Cubic Hermite spline of 'x' or 'y' over increasing eta."""
        if component not in self._splines:
            eta, x, y, dx, dy = self._ordered()
            if component == 'x':
                self._splines[component] = CubicHermiteSpline(eta, x, dx, extrapolate=False)
            else:
                self._splines[component] = CubicHermiteSpline(eta, y, dy, extrapolate=False)
        return self._splines[component]

    def interpolate(self, eta):
        """(x, y) at eta (scalar or array) inside the sampled range."""
        return self.spline('x')(eta), self.spline('y')(eta)

    def to_frame(self):
        return pd.DataFrame({'eta': self.eta, 'x': self.x, 'y': self.y, 'V': self.value})


def _hermite(theta, h, y0, y1, f0, f1):
    """Cubic Hermite on [0, 1] for one scalar component."""
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + theta
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _locate_event(event, sign, s0, h, state0, state1, deriv0, deriv1, g0, g1, tol):
    """Bisection for the zero of g inside one accepted step."""
    lo, hi = 0.0, 1.0
    g_lo = g0
    theta, x, y, g = 1.0, state1[0], state1[1], g1
    for _ in range(200):
        if abs(g) <= tol or (hi - lo) * h < 1e-16:
            break
        theta = 0.5 * (lo + hi)
        x = _hermite(theta, h, state0[0], state1[0], deriv0[0], deriv1[0])
        y = _hermite(theta, h, state0[1], state1[1], deriv0[1], deriv1[1])
        g = event.fn(sign * (s0 + theta * h), x, y)
        if (g < 0.0) == (g_lo < 0.0) and g != 0.0:
            lo, g_lo = theta, g
        else:
            hi = theta
    return theta, x, y, g


def _crossed(event, g_prev, g_new):
    if g_prev == 0.0 or not (math.isfinite(g_prev) and math.isfinite(g_new)):
        return False
    if g_prev * g_new > 0.0:
        return False
    if event.direction > 0:
        return g_prev < 0.0
    if event.direction < 0:
        return g_prev > 0.0
    return True


def solve(rhs, eta0, state, direction, config, events=(), value_fn=None):
    """
    Integrate rhs from (eta0, state) towards +-config.eta_max.

    Stops at the horizon, at the first terminal event, or raises
    StepUnderflow / NonFiniteState / StepBudgetExceeded. Returns a Trajectory.
    """
    config.validate()
    direction = Direction(direction)
    sign = direction.sign
    x, y = float(state[0]), float(state[1])
    if not (math.isfinite(eta0) and math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"Non-finite start ({eta0}, {x}, {y})", keys=['start'])

    s = sign * eta0
    s_end = config.eta_max
    if s >= s_end:
        raise ValidationError(
            f"Start eta={eta0} is beyond the horizon for a {direction.value} run", keys=['start']
        )

    if sign > 0:
        def f(ss, xx, yy):
            return rhs(ss, xx, yy)
    else:
        def f(ss, xx, yy):
            a, b = rhs(-ss, xx, yy)
            return (-a, -b)

    if value_fn is None:
        def value_fn(xx, yy):
            return 0.0

    rtol, atol = config.rel_tol, config.abs_tol
    h_min, h_max = config.h_min, config.h_max
    events = tuple(events)

    etas, xs, ys, vals, dxs, dys = [sign * s], [x], [y], [value_fn(x, y)], [], []
    k1 = f(s, x, y)
    dxs.append(sign * k1[0])
    dys.append(sign * k1[1])
    g_prev = [ev.fn(sign * s, x, y) for ev in events]
    hits = []
    status = 'horizon'
    h = min(config.h_init, h_max, s_end - s)
    n_steps = 0

    def partial():
        return _build(direction, etas, xs, ys, vals, dxs, dys, hits, 'failed')

    while s < s_end:
        n_steps += 1
        if n_steps > config.max_steps:
            logger.error(f"Step budget of {config.max_steps} exhausted at eta={sign * s}")
            raise StepBudgetExceeded(f"max_steps={config.max_steps} exhausted at eta={sign * s}")

        last = s_end - s <= h
        if last:
            h = s_end - s

        k2 = f(s + C2 * h, x + h * A21 * k1[0], y + h * A21 * k1[1])
        k3 = f(s + C3 * h,
               x + h * (A31 * k1[0] + A32 * k2[0]),
               y + h * (A31 * k1[1] + A32 * k2[1]))
        k4 = f(s + C4 * h,
               x + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
               y + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]))
        k5 = f(s + C5 * h,
               x + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
               y + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]))
        k6 = f(s + h,
               x + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
               y + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]))
        x_new = x + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0])
        y_new = y + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1])
        if not (math.isfinite(x_new) and math.isfinite(y_new)):
            logger.error(f"Non-finite state near eta={sign * s}")
            raise NonFiniteState(f"non-finite state near eta={sign * s}", sign * s, (x, y), partial())
        k7 = f(s + h, x_new, y_new)

        ex = h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0])
        ey = h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1])
        err = max(
            abs(ex) / (atol + rtol * max(abs(x), abs(x_new))),
            abs(ey) / (atol + rtol * max(abs(y), abs(y_new))),
        )

        if err > 1.0:
            h *= max(MIN_FACTOR, SAFETY * err ** -0.2)
            if h < h_min:
                logger.error(f"Step size underflow (h={h:.3e}) at eta={sign * s}")
                raise StepUnderflow(f"step underflow at eta={sign * s}", sign * s, (x, y), partial())
            continue

        s_new = s_end if last else s + h
        stop_at = None
        if events:
            step_hits = []
            g_new = [ev.fn(sign * s_new, x_new, y_new) for ev in events]
            for i, ev in enumerate(events):
                if _crossed(ev, g_prev[i], g_new[i]):
                    theta, xe, ye, ge = _locate_event(
                        ev, sign, s, h, (x, y), (x_new, y_new), k1, k7, g_prev[i], g_new[i],
                        config.event_tol,
                    )
                    step_hits.append((theta, ev, EventHit(ev.name, sign * (s + theta * h), xe, ye, ge)))
            step_hits.sort(key=lambda item: item[0])
            for theta, ev, hit in step_hits:
                hits.append(hit)
                logger.debug(f"Event {hit.name} at eta={hit.eta:.12g} (x={hit.x:.6g}, y={hit.y:.6g})")
                if ev.terminal:
                    stop_at = (theta, hit)
                    break
            g_prev = g_new

        if stop_at is not None:
            theta, hit = stop_at
            se = s + theta * h
            if se > s:
                ke = f(se, hit.x, hit.y)
                etas.append(sign * se)
                xs.append(hit.x)
                ys.append(hit.y)
                vals.append(value_fn(hit.x, hit.y))
                dxs.append(sign * ke[0])
                dys.append(sign * ke[1])
            status = 'event'
            break

        s, x, y, k1 = s_new, x_new, y_new, k7
        etas.append(sign * s)
        xs.append(x)
        ys.append(y)
        vals.append(value_fn(x, y))
        dxs.append(sign * k1[0])
        dys.append(sign * k1[1])

        factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
        h = min(h * factor, h_max)

    logger.debug(f"{direction.value} run from eta={eta0} finished ({status}) after {n_steps} steps, "
                 f"{len(etas)} samples")
    return _build(direction, etas, xs, ys, vals, dxs, dys, hits, status)


def _build(direction, etas, xs, ys, vals, dxs, dys, hits, status):
    return Trajectory(
        direction=direction,
        eta=np.asarray(etas, dtype=float),
        x=np.asarray(xs, dtype=float),
        y=np.asarray(ys, dtype=float),
        value=np.asarray(vals, dtype=float),
        dx=np.asarray(dxs, dtype=float),
        dy=np.asarray(dys, dtype=float),
        events=tuple(hits),
        status=status,
    )


def integrate(params, start, direction, config=None, events=()):
    """
    Integrate the phase system x' = y, y' = H(x) - eta y / 2.

    start is (eta0, PhasePoint). Each sample carries V(x, y).
    """
    config = config or IntegratorConfig()
    eta0, point = start
    return solve(phase_rhs(params), float(eta0), point, direction, config, events,
                 value_fn=phase_value(params))


@dataclass(frozen=True)
class MonotoneReport:
    max_violation: float
    ok: bool
    worst_eta: Optional[float] = None

    def to_dict(self):
        return {'max_violation': self.max_violation, 'ok': self.ok, 'worst_eta': self.worst_eta}


def check_monotone_F(traj, tol=1e-9):
    """
    F(eta) = V(x(eta), y(eta)) must not increase away from eta = 0: it is
    non-increasing for eta > 0 and non-decreasing for eta < 0. Along the
    traversal order of either run that means each step may not raise V.
    """
    if len(traj) < 2:
        return MonotoneReport(max_violation=0.0, ok=True)
    increments = np.diff(traj.value)
    i = int(np.argmax(increments))
    worst = float(max(increments[i], 0.0))
    return MonotoneReport(
        max_violation=worst,
        ok=worst <= tol,
        worst_eta=float(traj.eta[i + 1]) if worst > 0.0 else None,
    )
