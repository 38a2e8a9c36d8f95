from .apis.system import list_systems, load_system
from .conformance import build_calibration, calibrate, detect
from .mining import induce_network, mine_coefficients
from .models import CoefficientVector, ModelTemplate, integrate_reference
from .types import InputSchedule, Trace
from .version import __version__

__all__ = [
    'load_system', 'list_systems', 'ModelTemplate', 'CoefficientVector',
    'Trace', 'InputSchedule', 'integrate_reference', 'induce_network',
    'mine_coefficients', 'calibrate', 'build_calibration', 'detect',
    '__version__'
]
