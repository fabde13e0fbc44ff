"""
Run configuration.

Layers, lowest first: dataclass defaults, environment (.env via python-dotenv),
an INI file (`[common]` then `[<command>]`), command-line flags.

Environment Variables:
- SELFSIM_OUT_DIR: default output directory (out)
- SELFSIM_LOG_LEVEL: logging level (INFO)
- SELFSIM_WORKERS: worker processes for sweeps (1)
- DATABASE_URL: run ledger URL (sqlite:///<out>/runs.db)
"""

import configparser
import dataclasses
import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, field

from dotenv import load_dotenv

from exceptions import ValidationError
from kernels import derived_constants

load_dotenv()

logger = logging.getLogger(__name__)

VERSION = '1.0.0'

COMMANDS = ('levelset', 'homoclinic', 'heteroclinic', 'periodic', 'pde-verify', 'decay-fit')

# not part of the config hash: they do not change any output value
UNHASHED = ('out_dir', 'workers', 'log_level')


def env_out_dir():
    return os.getenv('SELFSIM_OUT_DIR', 'out')


def env_log_level():
    return os.getenv('SELFSIM_LOG_LEVEL', 'INFO').upper()


def env_workers():
    try:
        return int(os.getenv('SELFSIM_WORKERS', '1'))
    except ValueError:
        raise ValidationError("SELFSIM_WORKERS must be an integer", keys=['workers'])


def database_url(out_dir):
    return os.getenv('DATABASE_URL', f"sqlite:///{os.path.join(out_dir, 'runs.db')}")


@dataclass
class RunConfig:
    command: str
    p: float = 0.5
    p_grid: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    out_dir: str = field(default_factory=env_out_dir)
    workers: int = field(default_factory=env_workers)
    log_level: str = field(default_factory=env_log_level)
    seed: int = 0
    eta_max: float = 12.0
    # levelset
    c_levels: int = 9
    c_values: tuple = ()
    n_points: int = 256
    # homoclinic / decay-fit
    seeds: tuple = ((0.1, 0.0),)
    n_random_seeds: int = 0
    seed_level: float = 0.9
    q_values: tuple = (1.0,)
    fit_eta_min: float = 4.0
    fit_floor: float = 1e-13
    dump_trajectories: int = 0
    # heteroclinic
    tol_beta: float = 1e-9
    horizon: float = 10.0
    scan_min: float = 0.1
    scan_max: float = 0.7
    scan_n: int = 25
    # periodic
    amplitudes: tuple = (0.25, 0.5, 1.0)
    # pde-verify
    nx: int = 1025
    L: float = 0.0
    t0: float = 1.0
    t1: float = 2.0
    cfl: float = 0.4
    residual_nx: int = 1025
    profiles: tuple = ('homogeneous', 'homoclinic', 'front')

    @property
    def domain_half_width(self):
        """L, or 12 sqrt(t1) when unset."""
        return self.L if self.L > 0.0 else 12.0 * math.sqrt(self.t1)

    def validate(self):
        bad = []
        if self.command not in COMMANDS:
            bad.append('command')
        if not (0.0 < self.p < 1.0):
            bad.append('p')
        if not self.p_grid or any(not (0.0 < p < 1.0) for p in self.p_grid):
            bad.append('p_grid')
        if self.workers < 1:
            bad.append('workers')
        if not (self.eta_max > 0.0):
            bad.append('eta_max')
        if self.c_levels < 1:
            bad.append('c_levels')
        if self.n_points < 8:
            bad.append('n_points')
        if any(len(s) != 2 for s in self.seeds):
            bad.append('seeds')
        if self.n_random_seeds < 0:
            bad.append('n_random_seeds')
        if not (0.0 < self.seed_level <= 1.0):
            bad.append('seed_level')
        if any(q <= 0.0 for q in self.q_values):
            bad.append('q_values')
        if not (self.tol_beta > 0.0):
            bad.append('tol_beta')
        if not (0.0 < self.horizon):
            bad.append('horizon')
        if not (0.0 < self.scan_min < self.scan_max) or self.scan_n < 2:
            bad.append('scan')
        if any(a <= 0.0 for a in self.amplitudes):
            bad.append('amplitudes')
        if self.nx < 64 or self.nx % 2 == 0:
            bad.append('nx')
        if self.residual_nx < 64 or self.residual_nx % 2 == 0:
            bad.append('residual_nx')
        if self.L < 0.0:
            bad.append('L')
        if not (0.0 < self.t0 < self.t1):
            bad.append('t0')
        if not (0.0 < self.cfl <= 0.5):
            bad.append('cfl')
        if any(kind not in ('homogeneous', 'homoclinic', 'front') for kind in self.profiles):
            bad.append('profiles')
        if self.log_level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            bad.append('log_level')
        if self.c_values and 'p' not in bad:
            try:
                c_star = derived_constants(self.p).c_star
            except ValidationError:
                bad.append('p')
            else:
                if any(not (0.0 <= c <= c_star) for c in self.c_values):
                    bad.append('c_values')
        if bad:
            raise ValidationError(f"Invalid configuration for {self.command}: {', '.join(bad)}", keys=bad)
        return self

    def hashed_dict(self):
        return {k: v for k, v in dataclasses.asdict(self).items() if k not in UNHASHED}

    def config_hash(self):
        payload = json.dumps(self.hashed_dict(), sort_keys=True, default=list)
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_dict(self):
        return dataclasses.asdict(self)


def _parse_floats(text):
    return tuple(float(item) for item in text.replace(';', ',').split(',') if item.strip())


def _parse_seeds(text):
    """'0.1 0, 0 0.15' -> ((0.1, 0.0), (0.0, 0.15))"""
    seeds = []
    for item in text.split(','):
        if item.strip():
            seeds.append(tuple(float(v) for v in item.split()))
    return tuple(seeds)


def _coerce(name, raw):
    """Convert an INI string to the type of the RunConfig field."""
    default = {f.name: f for f in dataclasses.fields(RunConfig)}[name]
    sample = default.default if default.default is not dataclasses.MISSING else None
    try:
        if name == 'seeds':
            return _parse_seeds(raw)
        if name == 'profiles':
            return tuple(item.strip() for item in raw.split(',') if item.strip())
        if isinstance(sample, tuple):
            return _parse_floats(raw)
        if name in ('workers',) or isinstance(sample, int):
            return int(raw)
        if isinstance(sample, float):
            return float(raw)
        return raw.strip()
    except ValueError as e:
        raise ValidationError(f"Cannot parse config key {name}={raw!r}: {str(e)}", keys=[name]) from e


def read_config_file(path, command):
    """Values from [common] and [<command>] of an INI file, command section winning."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as f:
            parser.read_file(f)
    except configparser.Error as e:
        raise ValidationError(f"Malformed config file {path}: {str(e)}", keys=['config']) from e

    known = {f.name for f in dataclasses.fields(RunConfig)} - {'command'}
    values = {}
    for section in ('common', command):
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            name = key.replace('-', '_')
            if name not in known:
                raise ValidationError(f"Unknown config key '{key}' in [{section}]", keys=[key])
            values[name] = _coerce(name, raw)
    return values


def load_config(command, config_file=None, overrides=None):
    """Build and validate the RunConfig for command."""
    values = {}
    if config_file:
        values.update(read_config_file(config_file, command))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    if 'log_level' in values:
        values['log_level'] = str(values['log_level']).upper()
    config = RunConfig(command=command, **values)
    config.validate()
    logger.debug(f"Configuration for {command}: hash {config.config_hash()[:12]}")
    return config
