"""Linearized Bergman minimal model of glucose-insulin dynamics.

States are deviations from the initial operating point: plasma insulin
``delta_i``, interstitial insulin action ``delta_is`` and blood glucose
``delta_G``. Only glucose is measured.
"""
import math
from dataclasses import asdict, dataclass
from typing import List, Mapping, Optional, Tuple

import numpy as np

from ..errors import ScenarioError
from ..models.integrate import integrate_reference
from ..models.template import CoefficientVector, ModelTemplate
from ..schema import TrainingConfig
from ..stl import safety_formula
from ..types import InputSchedule, Trace
from .base import BaseSystem, ScenarioTraces
from .faults import FaultScenario, ScenarioSpec

VARIABLES = ('delta_i', 'delta_is', 'delta_G')
INPUTS = ('u1', 'u_is', 'u2')
PHYSICAL_NAMES = ('p1', 'p2', 'p3', 'p4', 'n', 'VoI', 'G_b')
PHYSICAL_UNITS = ('1/min', '1/min', '1e-6/(uU*min^2)', '', '1/min', 'dl',
                  'mg/dl')
COEFFICIENT_NAMES = {
    'a[delta_i,delta_i]': 'neg_n',
    'a[delta_is,delta_i]': 'p2',
    'a[delta_is,delta_is]': 'neg_p1',
    'a[delta_G,delta_is]': 'neg_G_b',
    'a[delta_G,delta_G]': 'neg_p3',
    'b[delta_i]': 'p4',
    'b[delta_G]': 'inv_VoI',
}
BOLUS_RANGE = (0.0, 40.0)
MEAL_RANGE = (0.0, 28.0)
TRAIN_INPUTS = ((15, 17), (20, 20), (10, 12), (12, 14), (25, 22), (5, 12))
TEST_INPUTS = ((12, 17), (28, 20), (7, 6), (14, 13), (17, 14), (32, 27))


def bergman_template() -> ModelTemplate:
    """Template of the linearized model.

    ``A = [[-n, 0, 0], [p2, -p1, 0], [0, -G_b, -p3]]`` over
    ``(delta_i, delta_is, delta_G)`` and ``B = diag(p4, 0, 1/VoI)`` over the
    insulin input ``u1`` and the meal input ``u2``.
    """
    return ModelTemplate(
        variable_names=VARIABLES,
        input_names=INPUTS,
        a_pattern=(('-', '0', '0'), ('+', '-', '0'), ('0', '-', '-')),
        b_pattern=('+', '0', '*'),
        beta=(False, False, True),
        time_unit='min',
        coefficient_names=COEFFICIENT_NAMES)


@dataclass(frozen=True)
class BergmanParams:
    """Physical coefficients; the defaults are the nominal simulator
    settings.

    ``i_b`` is the basal insulin offset of the interstitial insulin
    equation. It enters the plant as a constant forcing ``-p2 * i_b``.
    """
    p1: float = 0.098
    p2: float = 0.1406
    p3: float = 0.028
    p4: float = 0.05
    n: float = 199.6
    VoI: float = -80.0
    G_b: float = 0.035
    i_b: float = 0.0

    def __post_init__(self):
        if self.VoI == 0:
            raise ScenarioError('VoI must be non-zero.')

    def coefficients(self,
                     template: Optional[ModelTemplate] = None
                     ) -> CoefficientVector:
        template = template or bergman_template()
        return template.bind({
            'neg_n': -self.n,
            'p2': self.p2,
            'neg_p1': -self.p1,
            'neg_G_b': -self.G_b,
            'neg_p3': -self.p3,
            'p4': self.p4,
            'inv_VoI': 1.0 / self.VoI,
        })

    @classmethod
    def from_coefficients(cls, omega: CoefficientVector,
                          i_b: float = 0.0) -> 'BergmanParams':
        inv_voi = omega['inv_VoI']
        return cls(
            p1=-omega['neg_p1'],
            p2=omega['p2'],
            p3=-omega['neg_p3'],
            p4=omega['p4'],
            n=-omega['neg_n'],
            VoI=1.0 / inv_voi if inv_voi != 0 else math.inf,
            G_b=-omega['neg_G_b'],
            i_b=i_b)

    def physical(self) -> CoefficientVector:
        values = tuple(getattr(self, name) for name in PHYSICAL_NAMES)
        return CoefficientVector(PHYSICAL_NAMES, values, PHYSICAL_UNITS)

    def drift(self) -> Tuple[float, float, float]:
        return (0.0, -self.p2 * self.i_b, 0.0)

    def to_dict(self) -> dict:
        return asdict(self)


def reference_input_sets(
) -> Tuple[List[Tuple[float, float]], List[Tuple[float, float]]]:
    """The fault-free ``(bolus U, meal g)`` inputs used for calibration, as
    ``(train, test)``."""
    return list(TRAIN_INPUTS), list(TEST_INPUTS)


def check_scenario_inputs(bolus_U: float,
                          meal_g: float,
                          fault: FaultScenario,
                          horizon_min: float = 420.0,
                          tau: float = 1.0,
                          noise_sd: float = 0.0,
                          allow_out_of_range: bool = False) -> int:
    """Validate one scenario and return its number of steps.

    Raises:
        ScenarioError: Inputs outside the studied box, a horizon that is
            not a whole number of samples or fault events past the horizon.
    """
    if not allow_out_of_range:
        for label, value, (lo, hi) in (('bolus', bolus_U, BOLUS_RANGE),
                                       ('meal', meal_g, MEAL_RANGE)):
            if not lo <= value <= hi:
                raise ScenarioError(
                    f'{label} {value} is outside [{lo:g}, {hi:g}].')
    elif bolus_U < 0 or meal_g < 0:
        raise ScenarioError('Bolus and meal must be >= 0.')
    steps = round(horizon_min / tau)
    if steps < 1 or not math.isclose(steps * tau, horizon_min):
        raise ScenarioError(
            f'The horizon {horizon_min} is not a multiple of tau {tau}.')
    if noise_sd < 0:
        raise ScenarioError('noise_sd must be >= 0.')
    fault.validate(horizon_min, bolus_U)
    return steps


def generate_scenario(bolus_U: float,
                      meal_g: float,
                      fault: Optional[FaultScenario] = None,
                      horizon_min: float = 420.0,
                      tau: float = 1.0,
                      noise_sd: float = 0.0,
                      params: Optional[BergmanParams] = None,
                      g0: float = 120.0,
                      seed: Optional[int] = None,
                      allow_out_of_range: bool = False,
                      name: Optional[str] = None) -> ScenarioTraces:
    """Simulate one bolus and meal, possibly under a fault.

    The plant integrates the insulin actually delivered. The logged view
    carries the commanded insulin instead: the full bolus at time 0 and no
    phantom dose. Bolus and meal enter as one-sample pulses.

    Args:
        bolus_U (float): Commanded bolus in U, given at time 0.
        meal_g (float): Meal in grams, eaten at time 0.
        fault (FaultScenario, optional): Defaults to no fault.
        horizon_min (float): Trace length in minutes. Defaults to 420.
        tau (float): Sampling period in minutes. Defaults to 1.
        noise_sd (float): Standard deviation of Gaussian noise on the logged
            glucose. Defaults to 0.
        params (BergmanParams, optional): Plant coefficients. Defaults to
            the nominal settings.
        g0 (float): Glucose at time 0 in mg/dl. Defaults to 120.
        seed (int, optional): Seed of the measurement noise.
        allow_out_of_range (bool): Accept inputs outside the studied input
            box of 0-40 U and 0-28 g. Defaults to False.
        name (str, optional): Scenario name.

    Returns:
        ScenarioTraces: The logged and ground-truth views.
    """
    fault = fault or FaultScenario()
    params = params or BergmanParams()
    steps = check_scenario_inputs(bolus_U, meal_g, fault, horizon_min, tau,
                                  noise_sd, allow_out_of_range)

    template = bergman_template()
    delivered = InputSchedule.impulses(
        tau, u1=fault.insulin_events(bolus_U), u2=[(0.0, meal_g)])
    commanded = InputSchedule.impulses(
        tau, u1=[(0.0, bolus_U)], u2=[(0.0, meal_g)])
    truth = integrate_reference(
        template,
        params.coefficients(template),
        delivered, (0.0, 0.0, 0.0),
        tau,
        steps,
        drift=params.drift())
    truth = truth.with_signals(G=g0 + truth['delta_G'])

    measured = truth['G']
    if noise_sd > 0:
        rng = np.random.default_rng(seed)
        measured = measured + rng.normal(0.0, noise_sd, size=len(measured))
    logged = Trace(
        tau, {
            'delta_G': measured - g0,
            'G': measured,
            'u1': commanded.sample('u1', truth.times),
            'u2': truth['u2'],
        },
        time_unit='min')
    spec = ScenarioSpec(bolus_U, meal_g, fault, seed, name)
    return ScenarioTraces(spec.label, logged, truth, spec.to_dict())


class BergmanMinimalModel(BaseSystem):
    """Artificial pancreas case study.

    Args:
        params (BergmanParams, optional): Plant coefficients. Defaults to
            the nominal settings.
        horizon_min (float): Trace length. Defaults to 420 minutes.
        tau (float): Sampling period. Defaults to 1 minute.
        g0 (float): Initial glucose. Defaults to 120 mg/dl.
    """
    DEFAULT_SYSTEMMETA = dict(
        name='BergmanMinimalModel',
        description='Linearized Bergman minimal model of a type 1 diabetic '
        'patient with insulin bolus and meal inputs; only glucose is '
        'measured.',
        time_unit='min',
        physical_names=PHYSICAL_NAMES,
    )

    def __init__(self,
                 params: Optional[BergmanParams] = None,
                 horizon_min: float = 420.0,
                 tau: float = 1.0,
                 g0: float = 120.0):
        super().__init__()
        self.params = params or BergmanParams()
        self.horizon_min = horizon_min
        self.tau = tau
        self.g0 = g0

    def template(self) -> ModelTemplate:
        return bergman_template()

    def reference(self) -> CoefficientVector:
        return self.params.coefficients()

    def to_physical(self, omega: CoefficientVector) -> CoefficientVector:
        return BergmanParams.from_coefficients(omega).physical()

    def default_training_config(self) -> TrainingConfig:
        # Only glucose is measured: p2, p4, G_b and n reach it through the
        # single gain p2 * p4 * G_b / n. The ridge holds their split at a
        # seeded jitter of the nominal settings while the fit recovers p1,
        # p3, VoI and the gain. Insulin moves glucose by ~1e-4 of the meal
        # response, hence the fine Euler step and the tight tolerance.
        return TrainingConfig(
            init='nominal',
            init_jitter=0.01,
            optimizer='least_squares',
            prior_weight=1e-5,
            psi=1e-7,
            convergence_tol=1e-10,
            max_epochs=500)

    def safety_formula(self):
        return safety_formula('G')

    def scenario_from_dict(self, doc: Mapping) -> ScenarioSpec:
        try:
            scenario = ScenarioSpec(
                bolus_U=float(doc['bolus']),
                meal_g=float(doc['meal']),
                fault=FaultScenario.from_dict(doc.get('fault')),
                seed=doc.get('seed'),
                name=doc.get('name'))
        except KeyError as e:
            raise ScenarioError(f'Scenario is missing {e}.') from e
        self.check_scenario(scenario)
        return scenario

    def check_scenario(self, scenario: ScenarioSpec):
        check_scenario_inputs(scenario.bolus_U, scenario.meal_g,
                              scenario.fault, self.horizon_min, self.tau)

    def generate(self,
                 scenario: ScenarioSpec,
                 seed: Optional[int] = None,
                 noise_sd: float = 0.0) -> ScenarioTraces:
        return generate_scenario(
            scenario.bolus_U,
            scenario.meal_g,
            scenario.fault,
            horizon_min=self.horizon_min,
            tau=self.tau,
            noise_sd=noise_sd,
            params=self.params,
            g0=self.g0,
            seed=scenario.seed if scenario.seed is not None else seed,
            name=scenario.name)

    def calibration_scenarios(
            self) -> Tuple[List[ScenarioSpec], List[ScenarioSpec]]:
        train, test = reference_input_sets()
        return ([ScenarioSpec(b, m) for b, m in train],
                [ScenarioSpec(b, m) for b, m in test])

    def sampler(self, rng: np.random.Generator
                ) -> Tuple[Trace, CoefficientVector]:
        bolus = float(rng.uniform(*BOLUS_RANGE))
        meal = float(rng.uniform(*MEAL_RANGE))
        traces = self.generate(ScenarioSpec(bolus, meal))
        return traces.logged, self.reference()
