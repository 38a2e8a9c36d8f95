from .base import BaseSystem, ScenarioTraces
from .bergman import (BergmanMinimalModel, BergmanParams, bergman_template,
                      generate_scenario, reference_input_sets)
from .decay import DecayScenario, FirstOrderDecay
from .faults import FaultScenario, ScenarioSpec, blockage_scenarios

__all__ = [
    'BaseSystem', 'ScenarioTraces', 'BergmanMinimalModel', 'BergmanParams',
    'bergman_template', 'generate_scenario', 'reference_input_sets',
    'FaultScenario', 'ScenarioSpec', 'blockage_scenarios', 'FirstOrderDecay',
    'DecayScenario'
]
