from typing import List, Sequence, Union

import numpy as np

from ..errors import ShapeError
from ..models.template import CoefficientVector
from ..types import Trace


class CoefficientSequence:
    """Mined coefficient vectors as an index-domain signal with unit
    spacing.

    Args:
        omegas (Sequence[CoefficientVector]): Index-aligned vectors, i.e.
            all mined over the same template.
    """

    tau = 1.0
    t0 = 0.0

    def __init__(self, omegas: Sequence[CoefficientVector]):
        omegas = list(omegas)
        if not omegas:
            raise ShapeError('A coefficient sequence must not be empty.')
        names = omegas[0].names
        if any(omega.names != names for omega in omegas[1:]):
            raise ShapeError('Coefficient vectors of a sequence must be '
                             'index-aligned.')
        self.omegas = omegas
        self.names: List[str] = list(names)
        self._values = np.array([omega.values for omega in omegas])

    def __len__(self) -> int:
        return len(self.omegas)

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def __getitem__(self, name: str) -> np.ndarray:
        if name not in self.names:
            from ..utils import unknown_name_message
            raise KeyError(
                unknown_name_message('coefficient', name, self.names))
        return self._values[:, self.names.index(name)]

    def matrix(self) -> np.ndarray:
        """All coefficients, one row per vector."""
        return self._values

    def __repr__(self) -> str:
        return f'CoefficientSequence(length={len(self)}, names={self.names})'


Signal = Union[Trace, CoefficientSequence]


def as_signal(obj) -> Signal:
    """Accept a trace, a coefficient sequence, a single coefficient vector or
    a list of coefficient vectors."""
    if isinstance(obj, (Trace, CoefficientSequence)):
        return obj
    if isinstance(obj, CoefficientVector):
        return CoefficientSequence([obj])
    if isinstance(obj, (list, tuple)):
        return CoefficientSequence(obj)
    raise TypeError(f'Cannot evaluate STL over {type(obj).__name__}.')
