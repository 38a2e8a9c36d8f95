import numpy as np
import pytest

from u2detect.models import ModelTemplate
from u2detect.systems import bergman_template


def pytest_configure(config):
    config.addinivalue_line(
        'markers', 'slow: end-to-end runs that mine long traces')


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def scalar_template():
    """``dx/dt = a x`` with ``a`` of any sign and no input."""
    return ModelTemplate(
        variable_names=('x', ),
        input_names=('u', ),
        a_pattern=(('*', ), ),
        b_pattern=('0', ),
        beta=(True, ))


@pytest.fixture
def integrator_template():
    """``dx/dt = a x + b u``."""
    return ModelTemplate(
        variable_names=('x', ),
        input_names=('u', ),
        a_pattern=(('*', ), ),
        b_pattern=('+', ),
        beta=(True, ))


@pytest.fixture(scope='module')
def bergman():
    return bergman_template()
