import math

import numpy as np

from ..errors import DegenerateReferenceError, ShapeError
from ..models.template import CoefficientVector
from .formula import (Globally, Interval, LinearFeature, MaxRelativeDeviation,
                      Predicate, StlFormula)

# Relative deviation tolerated by the conformance formula.
CONFORMANCE_THRESHOLD = 0.01
# Hypoglycemia bound of the glucose safety property, mg/dl.
SAFETY_GLUCOSE = 70.0


def conformance_robustness(omega: CoefficientVector,
                           omega_ref: CoefficientVector,
                           threshold: float = CONFORMANCE_THRESHOLD) -> float:
    """Largest relative deviation of ``omega`` from ``omega_ref`` minus
    ``threshold``.

    Larger values mean a worse match; a negative value means every
    coefficient is within ``threshold`` of the reference.

    Args:
        omega (CoefficientVector): Mined coefficients.
        omega_ref (CoefficientVector): Reference coefficients, aligned with
            ``omega`` and all non-zero.
        threshold (float): Tolerated relative deviation. Defaults to 0.01.
    """
    if not omega.aligned_with(omega_ref):
        raise ShapeError(f'Coefficients {list(omega.names)} are not aligned '
                         f'with the reference {list(omega_ref.names)}.')
    ref = omega_ref.as_array()
    if np.any(ref == 0):
        zero = [n for n, v in zip(omega_ref.names, ref) if v == 0]
        raise DegenerateReferenceError(
            f'Reference coefficients {zero} are zero; relative deviation is '
            'undefined.')
    deviation = np.abs((omega.as_array() - ref) / ref)
    return float(np.max(deviation)) - threshold


def conformance_formula(omega_ref: CoefficientVector,
                        threshold: float = CONFORMANCE_THRESHOLD
                        ) -> StlFormula:
    """``G[0,0](maxdev <= threshold)`` over a coefficient sequence.

    Its robustness is ``-conformance_robustness(omega, omega_ref)``.
    """
    return Globally(
        Interval(0, 0),
        Predicate(MaxRelativeDeviation(omega_ref), '<=', threshold))


def safety_formula(signal: str = 'G',
                   bound: float = SAFETY_GLUCOSE) -> StlFormula:
    """Glucose stays above ``bound`` over the whole trace:
    ``G[0,inf](sig(G) - 70 >= 0)``."""
    return Globally(
        Interval(0, math.inf),
        Predicate(
            LinearFeature(((1.0, 'sig', signal), ), constant=-bound), '>=',
            0.0))
