from .integrate import (compose_substeps, integrate_reference,
                        rk4_propagators, trace_distance)
from .template import CoefficientVector, ModelTemplate, Slot, SlotSign

__all__ = [
    'ModelTemplate', 'CoefficientVector', 'Slot', 'SlotSign',
    'integrate_reference', 'trace_distance', 'compose_substeps',
    'rk4_propagators'
]
