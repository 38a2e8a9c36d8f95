import pytest

from u2detect.errors import ScenarioError
from u2detect.systems import FaultScenario, ScenarioSpec, blockage_scenarios


def test_blockage_events():
    fault = FaultScenario('cartridge_blockage', 0.4, 120.0)
    assert fault.insulin_events(7.5) == [(0.0, 4.5), (120.0, 3.0)]
    assert fault.label == 'blockage40_release120'
    assert not fault.has_phantom
    assert FaultScenario().insulin_events(7.5) == [(0.0, 7.5)]
    assert FaultScenario().label == 'clean'


def test_phantom_defaults():
    fault = FaultScenario('cartridge_blockage_with_phantom', 0.6, 50.0)
    assert fault.phantom(7.5) == (60.0, 3.75)
    assert fault.insulin_events(7.5)[-1] == (60.0, 3.75)
    custom = FaultScenario(
        'cartridge_blockage_with_phantom',
        0.6,
        50.0,
        phantom_bolus_U=2.0,
        phantom_time_min=200.0)
    assert custom.phantom(7.5) == (200.0, 2.0)
    assert custom.label == 'phantom60_release50'


def test_from_dict():
    fault = FaultScenario.from_dict({
        'kind': 'cartridge_blockage',
        'block_percent': 40,
        'release_time_min': 120
    })
    assert fault == FaultScenario('cartridge_blockage', 0.4, 120)
    assert FaultScenario.from_dict(None) == FaultScenario()
    assert FaultScenario.from_dict(fault.to_dict()) == fault
    with pytest.raises(ScenarioError, match='Invalid fault description'):
        FaultScenario.from_dict({'kind': 'none', 'delay': 3})


def test_invalid_faults():
    with pytest.raises(ScenarioError, match='Unknown fault kind'):
        FaultScenario('leak')
    with pytest.raises(ScenarioError):
        FaultScenario('cartridge_blockage', 1.5, 10.0)
    with pytest.raises(ScenarioError):
        FaultScenario('cartridge_blockage', 0.5, -1.0)
    with pytest.raises(ScenarioError, match='beyond'):
        FaultScenario('cartridge_blockage', 0.5, 500.0).validate(420.0)
    late = FaultScenario('cartridge_blockage_with_phantom', 0.5, 415.0)
    with pytest.raises(ScenarioError, match='Phantom'):
        late.validate(420.0, 7.5)
    FaultScenario('cartridge_blockage', 0.5, 500.0).validate(600.0)


def test_blockage_scenarios():
    scenarios = blockage_scenarios()
    assert len(scenarios) == 10
    assert [s.fault.has_phantom for s in scenarios] == [False] * 5 + [True] * 5
    assert all((s.bolus_U, s.meal_g) == (7.5, 20.0) for s in scenarios)
    assert [(round(s.fault.block_fraction * 100), s.fault.release_time_min)
            for s in scenarios[:5]] == [(20, 150), (40, 120), (80, 90),
                                        (70, 70), (60, 50)]
    assert len(blockage_scenarios(with_phantom=True)) == 5
    assert not any(s.fault.has_phantom
                   for s in blockage_scenarios(with_phantom=False))


def test_scenario_spec():
    spec = ScenarioSpec(7.5, 20.0,
                        FaultScenario('cartridge_blockage', 0.4, 120.0))
    assert spec.label == 'bolus7.5_meal20_blockage40_release120'
    assert ScenarioSpec(7.5, 20.0, name='custom').label == 'custom'
    doc = ScenarioSpec(7.5, 20.0, seed=3).to_dict()
    assert doc == {'bolus': 7.5, 'meal': 20.0, 'fault': {
        'kind': 'none',
        'block_fraction': 0.0,
        'release_time_min': 0.0
    }, 'seed': 3}
