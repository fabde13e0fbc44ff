"""
The leading-order oscillator W'' + sign(W)|W|^p = 0, W(0) = 1, W'(0) = 0.

Its period T(p) controls the local period a^{(1-p)/2} T(p) of the oscillatory
tails of the homoclinic family. The orbit is integrated with the shared
Dormand-Prince core; the period is computed independently by quadrature of a
Beta-type integral.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from exceptions import NumericalFailure, ValidationError
from integrator import Direction, EventSpec, IntegratorConfig, solve
from kernels import signed_power, validate_exponent

logger = logging.getLogger(__name__)

N_PERIODS = 3.05
SYMMETRY_TOL = 1e-8
SYMMETRY_POINTS = 64
NESTING_TOL = 1e-12


def oscillator_rhs(p):
    def f(zeta, w, wp):
        return (wp, -signed_power(w, p))

    return f


def oscillator_energy(p):
    """(W')^2/2 + |W|^{1+p}/(1+p); equals 1/(1+p) on the unit-amplitude orbit."""
    q = 1.0 + p

    def e(w, wp):
        return 0.5 * wp * wp + abs(w) ** q / q

    return e


def period_T(p):
    """
    T(p) = 2^{3/2} (1+p)^{1/2} int_0^1 (1 - l^{1+p})^{-1/2} dl.

    With u = l^{1+p} the integral becomes B(1/(1+p), 1/2)/(1+p); both endpoint
    singularities are absorbed into the algebraic weight of QUADPACK's qawse.
    """
    validate_exponent(p, allow_one=True)
    a = 1.0 / (1.0 + p)
    beta_value, error = quad(lambda u: 1.0, 0.0, 1.0, weight='alg', wvar=(a - 1.0, -0.5),
                             epsabs=1e-13, epsrel=1e-13)
    if error > 1e-10:
        raise NumericalFailure(f"Period quadrature error {error:.2e} too large for p={p}")
    return 2.0 ** 1.5 * (1.0 + p) ** 0.5 * beta_value / (1.0 + p)


def default_config(p, amplitude=1.0, n_periods=N_PERIODS):
    scale = amplitude ** (0.5 * (1.0 - p))
    return IntegratorConfig(
        rel_tol=1e-12,
        abs_tol=1e-14 * amplitude,
        h_init=1e-3 * scale,
        h_min=1e-14 * scale,
        h_max=0.05 * scale,
        eta_max=n_periods * period_T(p) * scale,
    )


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    p: float
    amplitude: float
    zeta: np.ndarray
    W: np.ndarray
    Wprime: np.ndarray
    energy: np.ndarray
    period_integrated: float
    turning_points: np.ndarray
    config: IntegratorConfig = field(repr=False)

    @property
    def is_control(self):
        return self.p == 1.0

    @property
    def energy_level(self):
        q = 1.0 + self.p
        return self.amplitude ** q / q

    @property
    def max_energy_deviation(self):
        return float(np.abs(self.energy - self.energy_level).max())

    @property
    def samples(self):
        return list(zip(self.zeta.tolist(), self.W.tolist(), self.Wprime.tolist()))

    def evaluate(self, zeta):
        """
        (W, W') at zeta by re-integrating from the nearest sample at or below it.

        Cubic interpolation loses accuracy at the zero crossings of W, where W'''
        is singular; a short solver run does not.
        """
        k = int(np.searchsorted(self.zeta, zeta, side='right')) - 1
        if k < 0 or zeta > self.zeta[-1]:
            raise ValidationError(f"zeta={zeta} outside the sampled range", keys=['zeta'])
        z0 = float(self.zeta[k])
        if zeta == z0:
            return float(self.W[k]), float(self.Wprime[k])
        run = solve(
            oscillator_rhs(self.p), z0, (self.W[k], self.Wprime[k]), Direction.FORWARD,
            self.config.with_(eta_max=zeta, h_init=min(self.config.h_max, zeta - z0)),
        )
        return float(run.x[-1]), float(run.y[-1])

    def shifted(self, delta):
        """The same samples attached to zeta + delta; a deliberately broken orbit."""
        return replace(self, zeta=self.zeta + delta)

    def one_period(self):
        mask = self.zeta <= self.period_integrated
        return self.W[mask], self.Wprime[mask]

    def to_dict(self):
        return {
            'p': self.p,
            'amplitude': self.amplitude,
            'period_integrated': self.period_integrated,
            'max_energy_deviation': self.max_energy_deviation,
            'n_samples': len(self.zeta),
            'control_case': self.is_control,
        }


def solve_W(p, config=None, amplitude=1.0, n_periods=N_PERIODS):
    """
    Integrate the oscillator from (amplitude, 0) over at least three periods.

    The period is the mean gap between successive maxima of W, which are the
    zeros of W' with W > 0 (zeta = 0 included).
    """
    validate_exponent(p, allow_one=True)
    if not (amplitude > 0.0 and math.isfinite(amplitude)):
        raise ValidationError(f"Amplitude must be positive, got {amplitude}", keys=['amplitude'])
    if p == 1.0:
        logger.info("p=1 is the harmonic control case")
    config = config or default_config(p, amplitude, n_periods)

    turning = EventSpec('turning', lambda z, w, wp: wp, direction=0)
    run = solve(oscillator_rhs(p), 0.0, (amplitude, 0.0), Direction.FORWARD, config,
                events=(turning,), value_fn=oscillator_energy(p))

    maxima = [0.0] + [hit.eta for hit in run.events_named('turning') if hit.x > 0.0]
    if len(maxima) < 3:
        raise NumericalFailure(
            f"Only {len(maxima) - 1} full periods found up to zeta={config.eta_max} for p={p}"
        )
    maxima = np.asarray(maxima)
    period = float(np.mean(np.diff(maxima)))
    logger.debug(f"Oscillator p={p}, a={amplitude}: period {period!r} from {len(maxima) - 1} cycles")
    return PeriodicOrbit(
        p=float(p),
        amplitude=float(amplitude),
        zeta=run.eta,
        W=run.x,
        Wprime=run.y,
        energy=run.value,
        period_integrated=period,
        turning_points=maxima,
        config=config,
    )


@dataclass(frozen=True)
class SymmetryReport:
    even_defect: float
    antisymmetry_defect: float
    tol: float

    @property
    def ok(self):
        return self.even_defect <= self.tol and self.antisymmetry_defect <= self.tol

    def to_dict(self):
        return {
            'even_defect': self.even_defect,
            'antisymmetry_defect': self.antisymmetry_defect,
            'ok': self.ok,
        }


def check_symmetry(orbit, tol=SYMMETRY_TOL, n_points=SYMMETRY_POINTS):
    """
    W(zeta) = W(-zeta) and W(zeta) = -W(T/2 - zeta), checked on the second
    period through periodicity: W(-zeta) = W(3T - zeta) and
    W(T/2 - zeta) = W(5T/2 - zeta), so every point stays inside the run.
    """
    T = orbit.period_integrated
    if orbit.zeta[-1] < 3.0 * T:
        raise ValidationError("Symmetry check needs an orbit over three periods", keys=['orbit'])
    even, anti = 0.0, 0.0
    for zeta in T + T * np.arange(n_points) / n_points:
        w = orbit.evaluate(zeta)[0]
        even = max(even, abs(w - orbit.evaluate(3.0 * T - zeta)[0]))
        anti = max(anti, abs(w + orbit.evaluate(2.5 * T - zeta)[0]))
    report = SymmetryReport(even_defect=even, antisymmetry_defect=anti, tol=tol)
    if not report.ok:
        logger.warning(f"Symmetry check failed for p={orbit.p}: even {even:.2e}, antisymmetric {anti:.2e}")
    return report


@dataclass(frozen=True)
class ScalingReport:
    p: float
    amplitude: float
    measured: float
    predicted: float

    @property
    def rel_error(self):
        return abs(self.measured - self.predicted) / self.predicted

    def ok(self, tol=1e-6):
        return self.rel_error <= tol

    def to_dict(self):
        return {
            'p': self.p,
            'amplitude': self.amplitude,
            'measured': self.measured,
            'predicted': self.predicted,
            'rel_error': self.rel_error,
        }


def amplitude_scaling_check(p, a, config=None):
    """Measured period from (a, 0) against a^{(1-p)/2} T(p)."""
    if not (a > 0.0):
        raise ValidationError(f"Amplitude must be positive, got {a}", keys=['amplitude'])
    orbit = solve_W(p, config=config, amplitude=a)
    return ScalingReport(
        p=float(p),
        amplitude=float(a),
        measured=orbit.period_integrated,
        predicted=a ** (0.5 * (1.0 - p)) * period_T(p),
    )


def scaling_slope(p, amplitudes):
    """Log-log slope of measured period against amplitude; (1-p)/2 in theory."""
    periods = [amplitude_scaling_check(p, a).measured for a in amplitudes]
    slope, _ = np.polyfit(np.log(amplitudes), np.log(periods), 1)
    return float(slope)


def orbit_radius(p, theta):
    """Distance from the origin to the unit-amplitude orbit along direction theta."""
    validate_exponent(p, allow_one=True)
    c, s = math.cos(theta), math.sin(theta)
    level = 1.0 / (1.0 + p)
    energy = oscillator_energy(p)

    def g(r):
        return energy(r * c, r * s) - level

    r_max = 1.01 * max(1.0, math.sqrt(2.0 / (1.0 + p)))
    return brentq(g, 0.0, r_max, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class NestingCheck:
    p_outer: float
    p_inner: float
    min_radial_gap: float
    max_wprime_outer: float
    max_wprime_inner: float

    @property
    def ok(self):
        return self.min_radial_gap >= -NESTING_TOL and self.max_wprime_outer > self.max_wprime_inner

    def to_dict(self):
        return {
            'p_outer': self.p_outer,
            'p_inner': self.p_inner,
            'min_radial_gap': self.min_radial_gap,
            'max_wprime_outer': self.max_wprime_outer,
            'max_wprime_inner': self.max_wprime_inner,
            'ok': self.ok,
        }


@dataclass(frozen=True, eq=False)
class PhasePortrait:
    orbits: dict
    nesting: list

    @property
    def nested(self):
        return all(check.ok for check in self.nesting)

    def to_dict(self):
        return {
            'p_values': sorted(self.orbits),
            'nesting': [check.to_dict() for check in self.nesting],
            'nested': self.nested,
        }


def emit_phase_portrait(p_list, n_theta=181, orbits=None):
    """
    Unit-amplitude orbits for each p and the pairwise nesting checks between
    neighbours in increasing p: radial comparison along n_theta rays in the
    upper half plane, plus the numerical max |W'| against sqrt(2/(1+p)).
    """
    p_sorted = sorted(float(p) for p in p_list)
    for p in p_sorted:
        validate_exponent(p)
    orbits = dict(orbits or {})
    for p in p_sorted:
        if p not in orbits:
            orbits[p] = solve_W(p)

    thetas = np.linspace(0.0, math.pi, n_theta)
    radii = {p: np.array([orbit_radius(p, th) for th in thetas]) for p in p_sorted}
    checks = []
    for outer, inner in zip(p_sorted, p_sorted[1:]):
        checks.append(NestingCheck(
            p_outer=outer,
            p_inner=inner,
            min_radial_gap=float((radii[outer] - radii[inner]).min()),
            max_wprime_outer=float(np.abs(orbits[outer].Wprime).max()),
            max_wprime_inner=float(np.abs(orbits[inner].Wprime).max()),
        ))
    portrait = PhasePortrait(orbits={p: orbits[p] for p in p_sorted}, nesting=checks)
    if not portrait.nested:
        logger.warning(f"Phase portrait nesting failed for p in {p_sorted}")
    return portrait
