import copy
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Tuple, Union

import numpy as np

from ..models.template import CoefficientVector, ModelTemplate
from ..schema import SystemMeta, TrainingConfig
from ..types import Trace


@dataclass
class ScenarioTraces:
    """The two views of one simulated scenario.

    Args:
        name (str): Scenario name, used for file names.
        logged (Trace): What the system records: measured outputs and the
            commanded inputs.
        truth (Trace): Every state and the inputs actually applied.
        spec (dict): The scenario description it was generated from.
    """
    name: str
    logged: Trace
    truth: Trace
    spec: dict = field(default_factory=dict)


class BaseSystem(metaclass=ABCMeta):
    """A case-study system: a template, reference coefficients and a
    ground-truth trace generator."""

    DEFAULT_SYSTEMMETA: dict

    def __init__(self, systemmeta: Optional[Union[dict, SystemMeta]] = None):
        systemmeta = copy.deepcopy(systemmeta or self.DEFAULT_SYSTEMMETA)
        if isinstance(systemmeta, dict):
            systemmeta = SystemMeta(**systemmeta)
        self.systemmeta = systemmeta

    @property
    def name(self) -> str:
        return self.systemmeta.name

    @property
    def description(self) -> str:
        return self.systemmeta.description

    @abstractmethod
    def template(self) -> ModelTemplate:
        """The model structure."""

    @abstractmethod
    def reference(self) -> CoefficientVector:
        """Nominal coefficients in template coordinates."""

    def to_physical(self, omega: CoefficientVector) -> CoefficientVector:
        """Map template coefficients to the physical coefficients compared
        during conformance checking."""
        return omega

    def reference_physical(self) -> CoefficientVector:
        return self.to_physical(self.reference())

    def default_training_config(self) -> TrainingConfig:
        return TrainingConfig()

    def safety_formula(self):
        """The safety property checked on logged traces, if any."""
        return None

    @abstractmethod
    def scenario_from_dict(self, doc: Mapping):
        """Validate one manifest scenario entry."""

    def check_scenario(self, scenario):
        """Raise :class:`ScenarioError` when ``scenario`` cannot be
        generated."""

    @abstractmethod
    def generate(self,
                 scenario,
                 seed: Optional[int] = None,
                 noise_sd: float = 0.0) -> ScenarioTraces:
        """Simulate one scenario, with Gaussian noise of standard deviation
        ``noise_sd`` on the measured outputs."""

    @abstractmethod
    def calibration_scenarios(self) -> Tuple[List, List]:
        """Fault-free train and test scenarios for calibration."""

    @abstractmethod
    def sampler(self, rng: np.random.Generator
                ) -> Tuple[Trace, CoefficientVector]:
        """Draw a random fault-free input, returning its logged trace and the
        true coefficients."""

    def __repr__(self) -> str:
        return f'{type(self).__name__}(systemmeta={self.systemmeta})'
