import pytest

from disclose_eq import PiecewiseLinearPrior, PowerPrior, UniformPrior
from disclose_eq.endogenous import solve_endog


@pytest.fixture(scope="session")
def uniform():
    return UniformPrior()


@pytest.fixture(scope="session")
def power2():
    return PowerPrior(a=2.0)


@pytest.fixture(scope="session")
def piecewise():
    return PiecewiseLinearPrior(knots=((0.0, 0.0), (0.5, 0.25), (1.0, 1.0)))


@pytest.fixture(scope="session")
def eq_uniform_small(uniform):
    """Uniform n=2, alpha=0.65, s=0.1: disclosure at the bottom."""
    return solve_endog(uniform, 2, 0.65, 0.1)


@pytest.fixture(scope="session")
def eq_uniform_large(uniform):
    """Uniform n=19, alpha=0.5, s=0.1: no disclosure at the bottom."""
    return solve_endog(uniform, 19, 0.5, 0.1)


@pytest.fixture(scope="session")
def eq_power(power2):
    """Power(2) n=3: strictly convex case with disclosure at the top."""
    return solve_endog(power2, 3, 0.4, 0.15)
