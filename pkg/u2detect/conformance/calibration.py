import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ConfigurationError, InsufficientCalibrationData
from ..models.template import CoefficientVector
from ..schema import Calibration, MiningFailure, MiningResult, TrainingConfig
from ..stl import CONFORMANCE_THRESHOLD, conformance_robustness
from ..types import Trace
from ..utils import get_logger

# Calibration needs at least this many train and test vectors.
MIN_CALIBRATION_SIZE = 2


def conformal_rank(m: int, alpha: float) -> int:
    """Rank ``k = ceil((m / 2 + 1) * (1 - alpha))`` of the nonconformity
    bound among ``m`` sorted residues.

    Raises:
        InsufficientCalibrationData: ``k`` falls outside ``1..m``.
    """
    if not 0 <= alpha < 1:
        raise ConfigurationError(f'alpha must be in [0, 1), got {alpha}.')
    # Absorb float noise such as 3.0000000000000004.
    k = math.ceil((m / 2 + 1) * (1 - alpha) - 1e-9)
    if m < MIN_CALIBRATION_SIZE or not 1 <= k <= m:
        raise InsufficientCalibrationData(
            f'Rank {k} is out of range for {m} test residues at alpha '
            f'{alpha}; add test traces or raise alpha.')
    return k


def calibrate_residues(residues: Sequence[float],
                       alpha: float = 0.05,
                       rho_m: float = 0.0,
                       omega_ref: Optional[CoefficientVector] = None,
                       threshold: float = CONFORMANCE_THRESHOLD,
                       provenance: Optional[Dict] = None) -> Calibration:
    """Build the acceptance interval from test residues.

    ``d`` is the ``k``-th smallest signed residue, clamped at 0, and the
    interval is ``[min(residues) - d, max(residues) + d]``.

    Args:
        residues (Sequence[float]): ``rho(test_i) - rho_m``.
        alpha (float): Miscoverage level. Defaults to 0.05.
        rho_m (float): Mean train robustness stored in the result.
            Defaults to 0.
        omega_ref (CoefficientVector, optional): Reference stored in the
            result. Defaults to an empty vector.
        threshold (float): Deviation threshold stored in the result.
        provenance (dict, optional): Extra run information.

    Examples:
        >>> calib = calibrate_residues(
        ...     [0.0225, 0.0028, 0.0011, -0.0168, 0.0328, 0.0048])
        >>> calib.k, calib.d
        (4, 0.0048)
    """
    residues = np.asarray(residues, dtype=float)
    if not np.all(np.isfinite(residues)):
        raise ConfigurationError('Residues must be finite.')
    k = conformal_rank(len(residues), alpha)
    d = max(float(np.sort(residues)[k - 1]), 0.0)
    interval = (float(residues.min()) - d, float(residues.max()) + d)
    mean = float(residues.mean())
    std = float(residues.std(ddof=1))
    get_logger().info(f'Calibrated {len(residues)} residues: k={k}, '
                      f'd={d:.6g}, interval=[{interval[0]:.6g}, '
                      f'{interval[1]:.6g}]')
    return Calibration(
        omega_ref=(omega_ref if omega_ref is not None else
                   CoefficientVector((), ())),
        rho_m=float(rho_m),
        test_residues=tuple(float(r) for r in residues),
        d=d,
        k=k,
        interval=interval,
        alpha=alpha,
        threshold=threshold,
        residue_mean=mean,
        residue_std=std,
        variance_interval=(mean - std, mean + std),
        provenance=dict(provenance or {}))


def calibrate(train_omegas: Sequence[CoefficientVector],
              test_omegas: Sequence[CoefficientVector],
              omega_ref: CoefficientVector,
              alpha: float = 0.05,
              threshold: float = CONFORMANCE_THRESHOLD,
              provenance: Optional[Dict] = None) -> Calibration:
    """Calibrate the detector from coefficients mined on fault-free traces.

    Args:
        train_omegas (Sequence[CoefficientVector]): Train coefficients; their
            mean robustness is ``rho_m``.
        test_omegas (Sequence[CoefficientVector]): Test coefficients; each
            yields one residue.
        omega_ref (CoefficientVector): Reference, all entries non-zero.
        alpha (float): Miscoverage level. Defaults to 0.05.
        threshold (float): Deviation threshold. Defaults to 0.01.
        provenance (dict, optional): Inputs, seeds and template hash.

    Returns:
        Calibration: The frozen detection context.
    """
    if len(train_omegas) < MIN_CALIBRATION_SIZE:
        raise InsufficientCalibrationData(
            f'Need at least {MIN_CALIBRATION_SIZE} train vectors, got '
            f'{len(train_omegas)}.')
    if len(test_omegas) < MIN_CALIBRATION_SIZE:
        raise InsufficientCalibrationData(
            f'Need at least {MIN_CALIBRATION_SIZE} test vectors, got '
            f'{len(test_omegas)}.')
    rho_train = [
        conformance_robustness(omega, omega_ref, threshold)
        for omega in train_omegas
    ]
    rho_m = float(np.mean(rho_train))
    residues = [
        conformance_robustness(omega, omega_ref, threshold) - rho_m
        for omega in test_omegas
    ]
    get_logger().info(f'Mean train robustness rho_m={rho_m:.6g}')
    return calibrate_residues(residues, alpha, rho_m, omega_ref, threshold,
                              provenance)


def _successes(results: List[Union[MiningResult, MiningFailure]],
               label: str) -> List[MiningResult]:
    kept = []
    for result in results:
        if isinstance(result, MiningFailure):
            get_logger().warning(
                f'Dropping {label} trace {result.source or result.index}: '
                f'{result.kind}: {result.message}')
        else:
            kept.append(result)
    return kept


def build_calibration(system,
                      train_traces: Sequence[Trace],
                      test_traces: Sequence[Trace],
                      config: Optional[TrainingConfig] = None,
                      alpha: float = 0.05,
                      threshold: float = CONFORMANCE_THRESHOLD,
                      jobs: int = 1,
                      sources: Optional[Tuple[Sequence[str],
                                              Sequence[str]]] = None
                      ) -> Calibration:
    """Mine both trace sets and calibrate against the system's reference.

    Coefficients are compared in the system's physical coordinates. Traces
    whose mining fails are dropped with a warning.

    Args:
        system (BaseSystem): The case-study system.
        train_traces (Sequence[Trace]): Fault-free train traces.
        test_traces (Sequence[Trace]): Fault-free test traces.
        config (TrainingConfig, optional): Defaults to the system's
            training config.
        alpha (float): Miscoverage level. Defaults to 0.05.
        threshold (float): Deviation threshold. Defaults to 0.01.
        jobs (int): Worker processes for mining. Defaults to 1.
        sources (tuple, optional): ``(train_labels, test_labels)``.
    """
    from ..mining import mine_trace_sequence
    template = system.template()
    config = config or system.default_training_config()
    train_src, test_src = sources or (None, None)
    mined = {}
    for label, traces, src in (('train', train_traces, train_src),
                               ('test', test_traces, test_src)):
        results = mine_trace_sequence(
            template,
            traces,
            config,
            nominal=system.reference(),
            jobs=jobs,
            sources=src)
        mined[label] = _successes(results, label)
    provenance = dict(
        system=system.name,
        template=template.fingerprint(),
        training=config.to_dict(),
        train=[r.source for r in mined['train']],
        test=[r.source for r in mined['test']],
        unconverged=[
            r.source for r in mined['train'] + mined['test']
            if not r.converged
        ])
    return calibrate(
        [system.to_physical(r.omega) for r in mined['train']],
        [system.to_physical(r.omega) for r in mined['test']],
        system.reference_physical(),
        alpha=alpha,
        threshold=threshold,
        provenance=provenance)
