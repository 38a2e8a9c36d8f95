import numpy as np
import pytest

from u2detect.conformance import (calibrate_residues, detect, detect_batch,
                                  judge)
from u2detect.models import CoefficientVector
from u2detect.schema import MiningFailure, MiningResult, Verdict
from u2detect.stl import safety_formula
from u2detect.systems import DecayScenario, FirstOrderDecay
from u2detect.types import Trace

NAMES = ('p1', 'p2', 'p3', 'p4', 'n', 'VoI', 'G_b')
REFERENCE = CoefficientVector(
    NAMES, (0.098, 0.1406, 0.028, 0.05, 199.6, -80.0, 0.035))
TEST_1 = CoefficientVector(
    NAMES, (0.0982, 0.1405, 0.0256, 0.0530, 198.1340, -80.2774, 0.0329))
PUBLISHED_RESIDUES = [0.0225, 0.0028, 0.0011, -0.0168, 0.0328, 0.0048]


@pytest.fixture
def table_calibration():
    return calibrate_residues(
        PUBLISHED_RESIDUES, rho_m=0.0542857, omega_ref=REFERENCE)


def _result(omega, converged=True, source=None):
    return MiningResult(
        omega=omega,
        final_loss=0.0,
        epochs_used=0,
        replication_error={},
        converged=converged,
        source=source)


def test_judge(table_calibration):
    verdict = judge(_result(TEST_1, converged=False, source='t1'),
                    table_calibration)
    assert verdict.robustness == pytest.approx(0.0757143, abs=1e-6)
    assert verdict.residue == pytest.approx(0.0214286, abs=1e-6)
    assert verdict.inside_interval and not verdict.flagged
    assert not verdict.variance_flagged
    assert verdict.low_confidence
    assert verdict.safety_robustness is None
    assert verdict.source == 't1'

    # The exact reference is far from what mining ever returns.
    verdict = judge(_result(REFERENCE), table_calibration)
    assert verdict.residue == pytest.approx(-0.0642857, abs=1e-6)
    assert verdict.flagged and verdict.variance_flagged
    assert not verdict.low_confidence


def test_judge_reports_safety(table_calibration):
    trace = Trace(1.0, {'G': [120.0, 60.0, 90.0]})
    verdict = judge(_result(TEST_1), table_calibration, trace,
                    safety=safety_formula())
    assert verdict.safety_robustness == pytest.approx(-10.0)
    # Safety is reported independently of the conformance flag.
    assert not verdict.flagged
    missing = Trace(1.0, {'x': [1.0, 2.0]})
    verdict = judge(_result(TEST_1), table_calibration, missing,
                    safety=safety_formula())
    assert verdict.safety_robustness is None
    assert set(verdict.to_dict()) >= {'residue', 'flagged', 'omega'}


@pytest.fixture(scope='module')
def decay_calibration():
    system = FirstOrderDecay()
    return calibrate_residues([-0.05, 0.0, 0.05, 0.1],
                              rho_m=0.0,
                              omega_ref=system.reference())


def test_detect_decay(decay_calibration):
    system = FirstOrderDecay()
    clean = system.generate(DecayScenario(0.5, 1.0)).logged
    verdict = detect(clean, decay_calibration, system=system, source='clean')
    assert isinstance(verdict, Verdict)
    assert not verdict.flagged
    assert verdict.safety_robustness is None
    assert verdict.source == 'clean'

    faulty = FirstOrderDecay(b=2.0).generate(DecayScenario(0.5, 1.0)).logged
    verdict = detect(faulty, decay_calibration, system=system)
    assert verdict.flagged
    assert verdict.omega['b'] > 1.5


def test_detect_needs_a_template(decay_calibration):
    trace = Trace(0.1, {'x': np.ones(5), 'u': np.zeros(5)})
    with pytest.raises(ValueError, match='template or a system'):
        detect(trace, decay_calibration)


def test_detect_batch(decay_calibration):
    system = FirstOrderDecay()
    clean = system.generate(DecayScenario(0.5, 1.0)).logged
    verdicts = detect_batch([clean, clean.select(['x'])],
                            decay_calibration,
                            system=system,
                            sources=['clean', 'broken'])
    assert isinstance(verdicts[0], Verdict) and not verdicts[0].flagged
    assert isinstance(verdicts[1], MiningFailure)
    assert verdicts[1].source == 'broken'
