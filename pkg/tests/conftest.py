import pytest

from heteroclinic import HeteroclinicConfig, construct_heteroclinic
from homoclinic import HomoclinicSeed, run_homoclinic
from integrator import IntegratorConfig
from kernels import derived_constants
from periodic import solve_W


@pytest.fixture(scope='session')
def params():
    return derived_constants(0.5)


@pytest.fixture(scope='session')
def even_run(params):
    return run_homoclinic(params, HomoclinicSeed(0.1, 0.0))


@pytest.fixture(scope='session')
def odd_run(params):
    return run_homoclinic(params, HomoclinicSeed(0.0, 0.15))


@pytest.fixture(scope='session')
def decay_run(params):
    """Seed (0.1, 0) with the tail resolved far below the default absolute tolerance."""
    return run_homoclinic(params, HomoclinicSeed(0.1, 0.0), IntegratorConfig(abs_tol=1e-18))


@pytest.fixture(scope='session')
def front(params):
    return construct_heteroclinic(params, HeteroclinicConfig())


@pytest.fixture(scope='session')
def orbit():
    return solve_W(0.5)
