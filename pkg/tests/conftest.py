import functools

import pytest
from hypothesis import HealthCheck, settings

from dmlneuron.model import ImprovedParams, OriginalParams
from dmlneuron.simulate import get_scenario, run_scenario

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def scenario_series(name: str, rtol: float = 1e-9):
    """Scenario runs are expensive; share them across test modules."""
    return run_scenario(get_scenario(name), rtol=rtol)


@pytest.fixture
def planar():
    return OriginalParams()


@pytest.fixture
def forced():
    return ImprovedParams()


@pytest.fixture(scope="session")
def series():
    return scenario_series
