import numpy as np
import pytest

from u2detect.errors import DegenerateReferenceError, ShapeError
from u2detect.models import CoefficientVector
from u2detect.parsers import parse_formula
from u2detect.stl import (CoefficientSequence, conformance_formula,
                          conformance_robustness, robustness, safety_formula)
from u2detect.types import Trace

NAMES = ('p1', 'p2', 'p3', 'p4', 'n', 'VoI', 'G_b')


def physical(*values):
    return CoefficientVector(NAMES, values)


REFERENCE = physical(0.098, 0.1406, 0.028, 0.05, 199.6, -80.0, 0.035)
TRAIN_MEAN = physical(0.0978, 0.1406, 0.0262, 0.0508, 198.134, -80.64,
                      0.0349)
TEST_1 = physical(0.0982, 0.1405, 0.0256, 0.0530, 198.1340, -80.2774, 0.0329)


def test_conformance_robustness():
    assert conformance_robustness(REFERENCE, REFERENCE) == pytest.approx(-0.01)
    assert conformance_robustness(TRAIN_MEAN, REFERENCE) == pytest.approx(
        0.0542857, abs=1e-6)
    assert conformance_robustness(TEST_1, REFERENCE) == pytest.approx(
        0.0757143, abs=1e-6)
    assert conformance_robustness(
        TEST_1, REFERENCE, threshold=0.1) == pytest.approx(
            -0.0142857, abs=1e-6)


def test_conformance_is_scale_free():
    scaled = CoefficientVector(NAMES, tuple(3 * v for v in TEST_1.values))
    scaled_ref = CoefficientVector(NAMES,
                                   tuple(3 * v for v in REFERENCE.values))
    assert conformance_robustness(scaled, scaled_ref) == pytest.approx(
        conformance_robustness(TEST_1, REFERENCE))


def test_conformance_errors():
    zero = physical(0.098, 0.1406, 0.028, 0.05, 199.6, -80.0, 0.0)
    with pytest.raises(DegenerateReferenceError, match='G_b'):
        conformance_robustness(TEST_1, zero)
    with pytest.raises(DegenerateReferenceError):
        conformance_formula(zero)
    with pytest.raises(ShapeError):
        conformance_robustness(CoefficientVector(('p1', ), (0.1, )),
                               REFERENCE)


def test_conformance_formula():
    phi = conformance_formula(REFERENCE)
    for omega in (REFERENCE, TRAIN_MEAN, TEST_1):
        assert robustness(phi, [omega]) == pytest.approx(
            -conformance_robustness(omega, REFERENCE))
    sequence = CoefficientSequence([REFERENCE, TEST_1])
    assert robustness(phi, sequence, t=1) == pytest.approx(-0.0757143,
                                                           abs=1e-6)
    with pytest.raises(ShapeError):
        robustness(parse_formula('sig(G) >= 0'), sequence)
    assert robustness(parse_formula('coef(p3) - 0.028 <= 0'),
                      sequence, t=1) == pytest.approx(0.0024)


def test_coefficient_sequence():
    with pytest.raises(ShapeError):
        CoefficientSequence([])
    with pytest.raises(ShapeError):
        CoefficientSequence(
            [REFERENCE, CoefficientVector(('p1', ), (0.1, ))])
    sequence = CoefficientSequence([REFERENCE, TRAIN_MEAN])
    np.testing.assert_array_equal(sequence['p1'], [0.098, 0.0978])
    with pytest.raises(KeyError, match='Did you mean `p1`'):
        sequence['p11']


def test_safety():
    phi = safety_formula()
    assert str(phi) == 'G[0,inf](sig(G) - 70 >= 0)'
    assert parse_formula(str(phi)) == phi

    times = np.arange(421)
    flat = Trace(1.0, {'G': np.full(421, 70.0)})
    assert robustness(phi, flat) == 0.0
    dip = Trace(1.0, {'G': 120.0 - 65.0 * np.exp(-((times - 90) / 30.0)**2)})
    assert robustness(phi, dip) == pytest.approx(-15.0)
    assert robustness(safety_formula(bound=50.0), dip) == pytest.approx(5.0)
