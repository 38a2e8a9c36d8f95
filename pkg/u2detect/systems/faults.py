from dataclasses import asdict, dataclass, field
from typing import List, Mapping, Optional, Tuple

from ..errors import ScenarioError

FAULT_KINDS = ('none', 'cartridge_blockage',
               'cartridge_blockage_with_phantom')
# Unlogged correction bolus as a fraction of the commanded one.
PHANTOM_BOLUS_FRACTION = 0.5
# Delay between the insulin release and the correction bolus, minutes.
PHANTOM_DELAY = 10.0


@dataclass(frozen=True)
class FaultScenario:
    """Insulin cartridge fault, optionally combined with a phantom meal.

    Under a blockage, ``block_fraction`` of the bolus is withheld and
    delivered as a lump at ``release_time_min``. A phantom meal adds an
    unlogged correction bolus.

    Args:
        kind (str): ``'none'``, ``'cartridge_blockage'`` or
            ``'cartridge_blockage_with_phantom'``.
        block_fraction (float): Withheld fraction in [0, 1].
        release_time_min (float): Time of the lump release.
        phantom_bolus_U (float, optional): Correction dose. Defaults to
            half of the commanded bolus.
        phantom_time_min (float, optional): Time of the correction.
            Defaults to 10 minutes after the release.
    """
    kind: str = 'none'
    block_fraction: float = 0.0
    release_time_min: float = 0.0
    phantom_bolus_U: Optional[float] = None
    phantom_time_min: Optional[float] = None

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise ScenarioError(
                f'Unknown fault kind {self.kind!r}, expected one of '
                f'{FAULT_KINDS}.')
        if not 0 <= self.block_fraction <= 1:
            raise ScenarioError(
                'block_fraction must be in [0, 1], got '
                f'{self.block_fraction}.')
        if self.release_time_min < 0:
            raise ScenarioError('release_time_min must be >= 0.')
        if self.phantom_bolus_U is not None and self.phantom_bolus_U < 0:
            raise ScenarioError('phantom_bolus_U must be >= 0.')

    @property
    def has_phantom(self) -> bool:
        return self.kind == 'cartridge_blockage_with_phantom'

    def phantom(self, bolus_U: float) -> Tuple[float, float]:
        """``(time, dose)`` of the correction bolus."""
        dose = (PHANTOM_BOLUS_FRACTION * bolus_U
                if self.phantom_bolus_U is None else self.phantom_bolus_U)
        time = (self.release_time_min + PHANTOM_DELAY
                if self.phantom_time_min is None else self.phantom_time_min)
        return time, dose

    def validate(self, horizon_min: float, bolus_U: float = 0.0):
        if self.kind == 'none':
            return
        if self.release_time_min >= horizon_min:
            raise ScenarioError(
                f'Release at {self.release_time_min} min is beyond the '
                f'{horizon_min} min horizon.')
        if self.has_phantom:
            time, _ = self.phantom(bolus_U)
            if not 0 <= time < horizon_min:
                raise ScenarioError(
                    f'Phantom bolus at {time} min is outside the '
                    f'{horizon_min} min horizon.')

    def insulin_events(self, bolus_U: float) -> List[Tuple[float, float]]:
        """``(time, dose)`` insulin actually delivered."""
        if self.kind == 'none':
            return [(0.0, bolus_U)]
        withheld = self.block_fraction * bolus_U
        events = [(0.0, bolus_U - withheld),
                  (self.release_time_min, withheld)]
        if self.has_phantom:
            events.append(self.phantom(bolus_U))
        return events

    @property
    def label(self) -> str:
        if self.kind == 'none':
            return 'clean'
        prefix = 'phantom' if self.has_phantom else 'blockage'
        return (f'{prefix}{round(self.block_fraction * 100):d}'
                f'_release{self.release_time_min:g}')

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, doc: Optional[Mapping]) -> 'FaultScenario':
        doc = dict(doc or {})
        if 'block_percent' in doc:
            doc['block_fraction'] = doc.pop('block_percent') / 100
        try:
            return cls(**doc)
        except TypeError as e:
            raise ScenarioError(f'Invalid fault description: {e}') from e


@dataclass(frozen=True)
class ScenarioSpec:
    """One insulin bolus and meal with an optional fault."""
    bolus_U: float
    meal_g: float
    fault: FaultScenario = field(default_factory=FaultScenario)
    seed: Optional[int] = None
    name: Optional[str] = None

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return f'bolus{self.bolus_U:g}_meal{self.meal_g:g}_{self.fault.label}'

    def to_dict(self) -> dict:
        doc = dict(
            bolus=self.bolus_U, meal=self.meal_g, fault=self.fault.to_dict())
        if self.seed is not None:
            doc['seed'] = self.seed
        if self.name:
            doc['name'] = self.name
        return doc


# (block percentage, release time in minutes) of the studied cartridge faults.
BLOCKAGE_SETTINGS = ((20, 150), (40, 120), (80, 90), (70, 70), (60, 50))
BLOCKAGE_INPUT = (7.5, 20.0)


def blockage_scenarios(with_phantom: Optional[bool] = None
                       ) -> List[ScenarioSpec]:
    """The ten studied fault configurations at 7.5 U and 20 g: five
    cartridge blockages, then the same five with a phantom meal.

    Args:
        with_phantom (bool, optional): Keep only the variants with (True)
            or without (False) the phantom meal. Defaults to both.
    """
    bolus, meal = BLOCKAGE_INPUT
    kinds = []
    if with_phantom in (None, False):
        kinds.append('cartridge_blockage')
    if with_phantom in (None, True):
        kinds.append('cartridge_blockage_with_phantom')
    return [
        ScenarioSpec(bolus, meal,
                     FaultScenario(kind, percent / 100, float(release)))
        for kind in kinds for percent, release in BLOCKAGE_SETTINGS
    ]
