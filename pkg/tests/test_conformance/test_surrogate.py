import math

import pytest

from u2detect.conformance import validate_surrogate
from u2detect.errors import ConfigurationError
from u2detect.parsers import parse_formula
from u2detect.schema import TrainingConfig
from u2detect.stl import conformance_formula
from u2detect.systems import BergmanMinimalModel, FirstOrderDecay

CONFIG = TrainingConfig(max_epochs=500)


@pytest.fixture(scope='module')
def system():
    return FirstOrderDecay()


def test_infinite_tolerance(system):
    estimate = validate_surrogate(
        system.sampler,
        system.template(),
        conformance_formula(system.reference()),
        math.inf,
        samples=30,
        config=CONFIG)
    assert estimate.probability == 1.0
    assert estimate.epsilon == 0.0
    assert estimate.failures == 0
    assert estimate.samples == 30


def test_mining_preserves_robustness(system):
    estimate = validate_surrogate(
        system.sampler,
        system.template(),
        conformance_formula(system.reference()),
        0.05,
        samples=30,
        config=CONFIG,
        seed=1)
    assert estimate.probability == 1.0
    # Wilson interval stays open below a perfect score.
    assert 0 < estimate.half_width < 0.1
    assert estimate.to_dict()['delta'] == 0.05


def test_invalid_arguments(system):
    phi = conformance_formula(system.reference())
    with pytest.raises(ConfigurationError, match='30'):
        validate_surrogate(system.sampler, system.template(), phi, 0.1,
                           samples=29)
    with pytest.raises(ConfigurationError):
        validate_surrogate(system.sampler, system.template(), phi, -1.0)
    with pytest.raises(ConfigurationError):
        validate_surrogate(
            system.sampler, system.template(), phi, 0.1, confidence=1.0)


def test_undefined_robustness_counts_as_exceedance(system):
    # The mined coefficients have no slot named `k`.
    estimate = validate_surrogate(
        system.sampler,
        system.template(),
        parse_formula('coef(k) >= 0'),
        math.inf,
        samples=30,
        config=CONFIG)
    assert estimate.probability == 0.0
    assert estimate.failures == 30


@pytest.mark.slow
def test_bergman_surrogate():
    system = BergmanMinimalModel()
    config = system.default_training_config()
    # Mining starts from a jitter of the nominal settings, not the truth.
    assert config.init_jitter > 0
    estimate = validate_surrogate(
        system.sampler,
        system.template(),
        conformance_formula(system.reference_physical()),
        0.05,
        samples=50,
        config=config,
        seed=2,
        nominal=system.reference(),
        transform=system.to_physical)
    assert estimate.samples == 50
    assert estimate.failures == 0
    assert estimate.epsilon <= 0.2
    assert estimate.probability == 1.0
