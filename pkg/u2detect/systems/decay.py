from dataclasses import asdict, dataclass
from typing import List, Mapping, Optional, Tuple

import numpy as np

from ..errors import ScenarioError
from ..models.integrate import integrate_reference
from ..models.template import CoefficientVector, ModelTemplate
from ..types import InputSchedule, Trace
from .base import BaseSystem, ScenarioTraces


@dataclass(frozen=True)
class DecayScenario:
    """A constant input of ``amplitude`` applied from ``x(0) = x0``."""
    amplitude: float = 0.0
    x0: float = 1.0
    name: Optional[str] = None

    @property
    def label(self) -> str:
        return self.name or f'decay_u{self.amplitude:g}_x{self.x0:g}'

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


class FirstOrderDecay(BaseSystem):
    """Scalar system ``dx/dt = a x + b u`` with a fully observed state.

    Args:
        a (float): Decay rate, negative. Defaults to -0.1.
        b (float): Input gain, positive. Defaults to 1.
        tau (float): Sampling period in seconds. Defaults to 0.1.
        steps (int): Samples per trace minus one. Defaults to 100.
    """
    DEFAULT_SYSTEMMETA = dict(
        name='FirstOrderDecay',
        description='Scalar exponential decay driven by a constant input. '
        'Useful as a smoke test of the detection pipeline.',
        time_unit='s',
        physical_names=('a', 'b'),
    )

    def __init__(self,
                 a: float = -0.1,
                 b: float = 1.0,
                 tau: float = 0.1,
                 steps: int = 100):
        super().__init__()
        self.a = a
        self.b = b
        self.tau = tau
        self.steps = steps

    def template(self) -> ModelTemplate:
        return ModelTemplate(
            variable_names=('x', ),
            input_names=('u', ),
            a_pattern=(('-', ), ),
            b_pattern=('+', ),
            beta=(True, ),
            time_unit='s',
            coefficient_names={
                'a[x,x]': 'a',
                'b[x]': 'b'
            })

    def reference(self) -> CoefficientVector:
        return self.template().bind({'a': self.a, 'b': self.b})

    def scenario_from_dict(self, doc: Mapping) -> DecayScenario:
        unknown = set(doc) - {'amplitude', 'x0', 'name', 'seed'}
        if unknown:
            raise ScenarioError(f'Unknown scenario keys {sorted(unknown)}.')
        return DecayScenario(
            float(doc.get('amplitude', 0.0)), float(doc.get('x0', 1.0)),
            doc.get('name'))

    def generate(self,
                 scenario: DecayScenario,
                 seed: Optional[int] = None,
                 noise_sd: float = 0.0) -> ScenarioTraces:
        if noise_sd < 0:
            raise ScenarioError('noise_sd must be >= 0.')
        truth = integrate_reference(
            self.template(), self.reference(),
            InputSchedule.constant(u=scenario.amplitude), (scenario.x0, ),
            self.tau, self.steps)
        logged = truth
        if noise_sd > 0:
            rng = np.random.default_rng(seed)
            x = truth['x']
            logged = truth.with_signals(
                x=x + rng.normal(0.0, noise_sd, size=len(x)))
        return ScenarioTraces(scenario.label, logged, truth,
                              scenario.to_dict())

    def calibration_scenarios(
            self) -> Tuple[List[DecayScenario], List[DecayScenario]]:
        train = [DecayScenario(u, 1.0) for u in (0.2, 0.4, 0.6, 0.8, 1.0, 1.2)]
        test = [DecayScenario(u, 0.5) for u in (0.1, 0.3, 0.5, 0.7, 0.9, 1.1)]
        return train, test

    def sampler(self, rng: np.random.Generator
                ) -> Tuple[Trace, CoefficientVector]:
        scenario = DecayScenario(
            float(rng.uniform(0.2, 1.0)), float(rng.uniform(0.5, 1.5)))
        return self.generate(scenario).logged, self.reference()
