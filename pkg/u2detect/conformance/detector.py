from typing import List, Optional, Sequence, Union

from ..errors import HorizonError
from ..mining import mine_coefficients, mine_trace_sequence
from ..models.template import CoefficientVector, ModelTemplate
from ..schema import (Calibration, MiningFailure, MiningResult,
                      TrainingConfig, Verdict)
from ..stl import StlFormula, conformance_robustness, robustness
from ..types import Trace
from ..utils import get_logger


def _mining_setup(template, config, system, nominal):
    if system is not None:
        template = template or system.template()
        config = config or system.default_training_config()
        if nominal is None:
            nominal = system.reference()
    if template is None:
        raise ValueError('Either a template or a system is required.')
    return template, config or TrainingConfig(), nominal


def _safety_robustness(trace: Trace,
                       safety: Optional[StlFormula]) -> Optional[float]:
    if safety is None:
        return None
    try:
        return robustness(safety, trace)
    except (KeyError, HorizonError) as e:
        get_logger().warning(f'Safety formula not evaluated: {e}')
        return None


def judge(result: MiningResult,
          calibration: Calibration,
          trace: Optional[Trace] = None,
          system=None,
          safety: Optional[StlFormula] = None) -> Verdict:
    """Turn a mining result into a verdict.

    Args:
        result (MiningResult): Coefficients mined from ``trace``.
        calibration (Calibration): The detection context.
        trace (Trace, optional): The mined trace, for the safety formula.
        system (BaseSystem, optional): Maps the mined coefficients to the
            calibration's coordinates and supplies the default safety
            formula.
        safety (StlFormula, optional): Safety property checked on the trace.
    """
    omega = result.omega
    if system is not None:
        omega = system.to_physical(omega)
        if safety is None:
            safety = system.safety_formula()
    rho = conformance_robustness(omega, calibration.omega_ref,
                                 calibration.threshold)
    residue = rho - calibration.rho_m
    inside = calibration.contains(residue)
    verdict = Verdict(
        robustness=rho,
        residue=residue,
        inside_interval=inside,
        flagged=not inside,
        safety_robustness=(_safety_robustness(trace, safety)
                           if trace is not None else None),
        omega=omega,
        variance_flagged=not calibration.variance_contains(residue),
        low_confidence=not result.converged,
        source=result.source)
    if verdict.low_confidence:
        get_logger().warning(
            f'Mining of {result.source or "trace"} did not converge; the '
            'verdict is low-confidence.')
    return verdict


def detect(trace: Trace,
           calibration: Calibration,
           template: Optional[ModelTemplate] = None,
           config: Optional[TrainingConfig] = None,
           system=None,
           nominal: Optional[CoefficientVector] = None,
           safety: Optional[StlFormula] = None,
           source: Optional[str] = None) -> Verdict:
    """Mine ``trace`` and flag it when its robustness residue falls outside
    the calibrated interval.

    The safety formula is evaluated on the same trace and reported
    independently of the flag.

    Args:
        trace (Trace): The operational trace.
        calibration (Calibration): The detection context.
        template (ModelTemplate, optional): Defaults to the system's.
        config (TrainingConfig, optional): Defaults to the system's.
        system (BaseSystem, optional): The case-study system.
        nominal (CoefficientVector, optional): Mining start point, defaults
            to the system's reference.
        safety (StlFormula, optional): Defaults to the system's safety
            formula.
        source (str, optional): Label of the trace.

    Returns:
        Verdict: ``flagged`` holds iff the residue is outside the interval.
    """
    template, config, nominal = _mining_setup(template, config, system,
                                              nominal)
    result = mine_coefficients(template, trace, config, nominal, source)
    return judge(result, calibration, trace, system, safety)


def detect_batch(traces: Sequence[Trace],
                 calibration: Calibration,
                 template: Optional[ModelTemplate] = None,
                 config: Optional[TrainingConfig] = None,
                 system=None,
                 nominal: Optional[CoefficientVector] = None,
                 safety: Optional[StlFormula] = None,
                 jobs: int = 1,
                 sources: Optional[Sequence[str]] = None
                 ) -> List[Union[Verdict, MiningFailure]]:
    """Run :func:`detect` over many traces, mining them in parallel.

    A trace whose mining raises yields its :class:`MiningFailure`.
    """
    template, config, nominal = _mining_setup(template, config, system,
                                              nominal)
    results = mine_trace_sequence(
        template, traces, config, nominal, jobs=jobs, sources=sources)
    return [
        result if isinstance(result, MiningFailure) else judge(
            result, calibration, trace, system, safety)
        for trace, result in zip(traces, results)
    ]
