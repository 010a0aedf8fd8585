import pytest

from rswlab.core import FlowParameters
from rswlab.solutions import default_catalog


@pytest.fixture(scope="session")
def params11() -> FlowParameters:
    return FlowParameters(1.0, 1.0)


@pytest.fixture(scope="session")
def ring_params() -> FlowParameters:
    return FlowParameters(0.1, 1.0)


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()
