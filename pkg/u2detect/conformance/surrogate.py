import math
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.stats import binomtest

from ..errors import ConfigurationError
from ..mining import mine_trace_sequence
from ..models.template import CoefficientVector, ModelTemplate
from ..schema import MiningFailure, SurrogateEstimate, TrainingConfig
from ..stl import CoefficientSequence, StlFormula, robustness
from ..types import Trace
from ..utils import get_logger

MIN_SURROGATE_SAMPLES = 30

Sampler = Callable[[np.random.Generator], Tuple[Trace, CoefficientVector]]


def validate_surrogate(sampler: Sampler,
                       template: ModelTemplate,
                       phi: StlFormula,
                       delta: float,
                       samples: int = 50,
                       config: Optional[TrainingConfig] = None,
                       seed: int = 0,
                       nominal: Optional[CoefficientVector] = None,
                       transform: Optional[Callable] = None,
                       confidence: float = 0.95,
                       jobs: int = 1) -> SurrogateEstimate:
    """Estimate how often mining preserves the robustness of ``phi``.

    Each sample draws a trace with known true coefficients, mines it and
    counts a success when ``|rho(phi, omega_true) - rho(phi, omega_mined)|
    <= delta``. Mining failures and undefined robustness count as
    exceedances.

    Args:
        sampler (Callable): ``sampler(rng) -> (trace, omega_true)``, e.g.
            :meth:`BaseSystem.sampler`.
        template (ModelTemplate): The model structure.
        phi (StlFormula): Formula over a coefficient sequence.
        delta (float): Robustness tolerance, ``inf`` allowed.
        samples (int): Number of draws, at least 30. Defaults to 50.
        config (TrainingConfig, optional): Mining options.
        seed (int): Seed of the sampler. Defaults to 0.
        nominal (CoefficientVector, optional): Start point for
            ``init='nominal'``.
        transform (Callable, optional): Maps coefficients to the coordinates
            ``phi`` refers to, e.g. :meth:`BaseSystem.to_physical`.
        confidence (float): Level of the Wilson interval on the success
            rate. Defaults to 0.95.
        jobs (int): Worker processes for mining. Defaults to 1.

    Returns:
        SurrogateEstimate: Empirical ``1 - epsilon`` and its half width.
    """
    if samples < MIN_SURROGATE_SAMPLES:
        raise ConfigurationError(
            f'Need at least {MIN_SURROGATE_SAMPLES} samples, got {samples}.')
    if not delta >= 0:
        raise ConfigurationError(f'delta must be >= 0, got {delta}.')
    if not 0 < confidence < 1:
        raise ConfigurationError(
            f'confidence must be in (0, 1), got {confidence}.')
    transform = transform or (lambda omega: omega)
    rng = np.random.default_rng(seed)
    draws = [sampler(rng) for _ in range(samples)]
    results = mine_trace_sequence(
        template, [trace for trace, _ in draws],
        config,
        nominal=nominal,
        jobs=jobs,
        sources=[f'sample{i}' for i in range(samples)])

    successes, failures = 0, 0
    for i, ((_, omega_true), result) in enumerate(zip(draws, results)):
        if isinstance(result, MiningFailure):
            failures += 1
            continue
        try:
            gap = abs(
                robustness(phi,
                           CoefficientSequence([transform(omega_true)])) -
                robustness(phi,
                           CoefficientSequence([transform(result.omega)])))
        except (KeyError, ValueError) as e:
            get_logger().warning(
                f'Robustness of sample{i} is undefined: {e}')
            failures += 1
            continue
        if math.isinf(delta) or gap <= delta:
            successes += 1

    probability = successes / samples
    ci = binomtest(successes, samples).proportion_ci(
        confidence_level=confidence, method='wilson')
    estimate = SurrogateEstimate(
        delta=delta,
        probability=probability,
        epsilon=1.0 - probability,
        half_width=(ci.high - ci.low) / 2,
        samples=samples,
        failures=failures,
        confidence=confidence)
    get_logger().info(f'Surrogate validation: P(gap <= {delta:g}) = '
                      f'{probability:.3f} +/- {estimate.half_width:.3f} '
                      f'over {samples} samples, {failures} failures')
    return estimate
