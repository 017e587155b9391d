import math

import pytest

from transent.config import OpticsSettings
from transent.gaussian import SourceParameters, make_source_state
from transent.optics import DimensionScale

SIGMA_PLUS_SQ = 47.0
SIGMA_MINUS_SQ = 0.006


@pytest.fixture
def params():
    return SourceParameters(SIGMA_PLUS_SQ, SIGMA_MINUS_SQ)


@pytest.fixture
def source_cov(params):
    return make_source_state(params)


@pytest.fixture
def optics():
    return OpticsSettings()


@pytest.fixture
def scale(optics):
    return DimensionScale(optics.k, optics.f_prime)


@pytest.fixture
def k(optics):
    return optics.k


F_PRIME = 0.25 / math.sqrt(2.0)
