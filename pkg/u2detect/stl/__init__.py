from .formula import (And, Eventually, Feature, Globally, Interval,
                      LinearFeature, MaxRelativeDeviation, Not, Or, Predicate,
                      StlFormula, TrueFormula, Until, robustness, satisfied)
from .signal import CoefficientSequence, Signal, as_signal
from .specs import (CONFORMANCE_THRESHOLD, SAFETY_GLUCOSE,
                    conformance_formula, conformance_robustness,
                    safety_formula)

__all__ = [
    'StlFormula', 'TrueFormula', 'Predicate', 'Not', 'And', 'Or',
    'Globally', 'Eventually', 'Until', 'Interval', 'Feature',
    'LinearFeature', 'MaxRelativeDeviation', 'robustness', 'satisfied',
    'CoefficientSequence', 'Signal', 'as_signal', 'conformance_robustness',
    'conformance_formula', 'safety_formula', 'CONFORMANCE_THRESHOLD',
    'SAFETY_GLUCOSE'
]
