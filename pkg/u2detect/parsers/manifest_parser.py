from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Mapping, Optional, Union

from ..errors import ManifestError, ScenarioError
from ..schema import TrainingConfig

MANIFEST_KEYS = ('system', 'system_args', 'template', 'scenarios',
                 'training', 'calibration', 'out_dir', 'seed', 'jobs',
                 'noise_sd')
# Named scenario groups that can stand in for explicit entries.
SCENARIO_PRESETS = ('calibration_train', 'calibration_test', 'blockage',
                    'blockage_only', 'phantom_only')


@dataclass
class RunManifest:
    """A batch experiment.

    Args:
        system (str): Registered system name.
        system_args (dict): Keyword arguments of the system.
        template (str, optional): Template file overriding the system's.
        scenarios (list): Validated scenario objects of the system.
        training (TrainingConfig): Mining options.
        alpha (float): Miscoverage level of calibration.
        reference (str, optional): System name or coefficient JSON used as
            the calibration reference.
        out_dir (str): Output directory.
        seed (int): Global seed; scenario ``i`` without its own seed uses
            ``seed + i``.
        jobs (int): Worker processes.
        noise_sd (float): Measurement noise of generated traces.
        path (str, optional): The manifest file.
    """
    system: str = 'BergmanMinimalModel'
    system_args: dict = field(default_factory=dict)
    template: Optional[str] = None
    scenarios: List[Any] = field(default_factory=list)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    alpha: float = 0.05
    reference: Optional[str] = None
    out_dir: str = 'runs/default'
    seed: int = 0
    jobs: int = 1
    noise_sd: float = 0.0
    path: Optional[str] = None

    def load_system(self):
        from ..apis import load_system
        return load_system(self.system, **self.system_args)

    def scenario_seed(self, index: int) -> int:
        own = getattr(self.scenarios[index], 'seed', None)
        return own if own is not None else self.seed + index

    def to_dict(self) -> dict:
        return dict(
            system=self.system,
            system_args=dict(self.system_args),
            template=self.template,
            scenarios=[s.to_dict() for s in self.scenarios],
            training=self.training.to_dict(),
            calibration=dict(alpha=self.alpha, reference=self.reference),
            out_dir=self.out_dir,
            seed=self.seed,
            jobs=self.jobs,
            noise_sd=self.noise_sd,
        )


def _expand_preset(name: str, system) -> list:
    from ..systems import BergmanMinimalModel, blockage_scenarios
    if name == 'calibration_train':
        return system.calibration_scenarios()[0]
    if name == 'calibration_test':
        return system.calibration_scenarios()[1]
    if not isinstance(system, BergmanMinimalModel):
        raise ManifestError(
            f'Scenario preset `{name}` needs the BergmanMinimalModel system.')
    with_phantom = {
        'blockage': None,
        'blockage_only': False,
        'phantom_only': True
    }[name]
    return blockage_scenarios(with_phantom)


def parse_manifest(doc: Mapping,
                   base_dir: Union[str, Path] = '.',
                   **overrides) -> RunManifest:
    """Validate a manifest document.

    Scenario entries are either objects understood by the system's
    ``scenario_from_dict`` or preset names such as ``'blockage'``. Keyword
    overrides (``seed``, ``jobs``, ``out_dir``) win over the document when
    they are not None.

    Raises:
        ManifestError: Any invalid entry, with its location.
    """
    from ..apis import list_systems, load_system
    from ..utils import unknown_name_message

    if not isinstance(doc, Mapping):
        raise ManifestError('A manifest must be a mapping.')
    unknown = sorted(set(doc) - set(MANIFEST_KEYS))
    if unknown:
        raise ManifestError(
            unknown_name_message('manifest key', unknown[0], MANIFEST_KEYS))
    doc = dict(doc)
    doc.update({k: v for k, v in overrides.items() if v is not None})

    name = doc.get('system', 'BergmanMinimalModel')
    if name not in list_systems():
        raise ManifestError(unknown_name_message('system', name,
                                                 list_systems()))
    system_args = dict(doc.get('system_args') or {})
    try:
        system = load_system(name, **system_args)
    except TypeError as e:
        raise ManifestError(f'system_args: {e}') from e

    template = doc.get('template')
    if template is not None:
        path = Path(base_dir) / template
        if not path.is_file():
            raise ManifestError(f'template: file {str(path)!r} not found.')
        template = str(path)

    scenarios = []
    for i, entry in enumerate(doc.get('scenarios') or []):
        try:
            if isinstance(entry, str):
                if entry not in SCENARIO_PRESETS:
                    raise ManifestError(
                        unknown_name_message('scenario preset', entry,
                                             SCENARIO_PRESETS))
                for scenario in _expand_preset(entry, system):
                    system.check_scenario(scenario)
                    scenarios.append(scenario)
            elif isinstance(entry, Mapping):
                scenarios.append(system.scenario_from_dict(entry))
            else:
                raise ManifestError('Expected an object or a preset name.')
        except (ScenarioError, ManifestError, TypeError, ValueError) as e:
            raise ManifestError(f'scenarios[{i}]: {e}') from e
    labels = [s.label for s in scenarios]
    duplicated = sorted({x for x in labels if labels.count(x) > 1})
    if duplicated:
        raise ManifestError(f'Duplicated scenario names {duplicated}; set '
                            '`name` to tell them apart.')

    try:
        training = TrainingConfig.from_dict({
            **system.default_training_config().to_dict(),
            **dict(doc.get('training') or {})
        })
    except (ValueError, TypeError) as e:
        raise ManifestError(f'training: {e}') from e

    calibration = dict(doc.get('calibration') or {})
    alpha = float(calibration.get('alpha', 0.05))
    if not 0 <= alpha < 1:
        raise ManifestError(f'calibration.alpha must be in [0, 1), got '
                            f'{alpha}.')
    seed, jobs = doc.get('seed', 0), doc.get('jobs', 1)
    if not isinstance(seed, int) or not isinstance(jobs, int) or jobs < 1:
        raise ManifestError('seed must be an integer and jobs >= 1.')
    noise_sd = float(doc.get('noise_sd', 0.0))
    if noise_sd < 0:
        raise ManifestError('noise_sd must be >= 0.')

    return RunManifest(
        system=name,
        system_args=system_args,
        template=template,
        scenarios=scenarios,
        training=training,
        alpha=alpha,
        reference=calibration.get('reference'),
        out_dir=str(doc.get('out_dir', 'runs/default')),
        seed=seed,
        jobs=jobs,
        noise_sd=noise_sd)


def load_manifest(path: Union[str, Path], **overrides) -> RunManifest:
    """Read a ``.json``, ``.yaml`` or ``.py`` manifest with mmengine.

    Examples:
        >>> manifest = load_manifest('configs/blockage.json', seed=3)
    """
    from mmengine import Config
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f'Manifest {str(path)!r} not found.')
    try:
        doc = Config.fromfile(str(path)).to_dict()
    except Exception as e:
        raise ManifestError(f'Cannot read manifest {str(path)!r}: {e}') from e
    manifest = parse_manifest(doc, path.parent, **overrides)
    manifest.path = str(path)
    return manifest
