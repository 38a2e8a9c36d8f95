from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, List, Mapping, Optional, Tuple

from .errors import ConfigurationError
from .models.template import CoefficientVector

INIT_MODES = ('scale', 'random', 'nominal')
OPTIMIZERS = ('adam', 'least_squares')


@dataclass
class SystemMeta:
    """Meta information for a case-study system.

    Args:
        name (str): System name used by the registry and the CLI.
        description (str): Short description of the system.
        time_unit (str): Time unit of the system's traces.
        physical_names (tuple[str, ...]): Names of the physical coefficients
            compared during conformance checking.
    """
    name: str
    description: str
    time_unit: str
    physical_names: Tuple[str, ...]


@dataclass(frozen=True)
class TrainingConfig:
    """Options of coefficient mining.

    Args:
        learning_rate (float): Relative step size of the adaptive-moment
            update. Defaults to 1e-3.
        max_epochs (int): Epoch budget. Defaults to 20000.
        convergence_tol (float): Relative loss improvement below which an
            epoch counts as stalled. Defaults to 1e-6.
        patience (int): Consecutive stalled epochs before stopping.
            Defaults to 50.
        seed (int): Seed of random initialization. Defaults to 0.
        psi (float): Trace replication error factor, also bounds the Euler
            step. Defaults to 1e-3.
        normalize_loss_per_signal (bool): Divide each signal's squared error
            by its squared peak. Defaults to True.
        init (str): ``'scale'``, ``'random'`` or ``'nominal'``.
            Defaults to ``'scale'``.
        loss_floor (float): A loss at or below it counts as converged.
            Defaults to 1e-12.
        optimizer (str): ``'adam'`` runs the adaptive-moment update on the
            backpropagated gradient. ``'least_squares'`` runs a trust-region
            Gauss-Newton fit on the exact residual Jacobian; there
            ``max_epochs`` bounds the residual evaluations and
            ``convergence_tol`` is the relative cost and step tolerance.
            Defaults to ``'adam'``.
        init_jitter (float): With ``init='nominal'``, every coefficient is
            scaled by ``exp(U(-init_jitter, init_jitter))``, seeded by
            ``seed`` and the trace. Defaults to 0.
        prior_weight (float): Weight of a ridge pulling ``'least_squares'``
            towards the start point, relative to the largest singular
            value of the Jacobian there. Holds directions the trace does
            not determine. Defaults to 0.
    """
    learning_rate: float = 1e-3
    max_epochs: int = 20000
    convergence_tol: float = 1e-6
    patience: int = 50
    seed: int = 0
    psi: float = 1e-3
    normalize_loss_per_signal: bool = True
    init: str = 'scale'
    loss_floor: float = 1e-12
    optimizer: str = 'adam'
    init_jitter: float = 0.0
    prior_weight: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError(
                f'learning_rate must be > 0, got {self.learning_rate}.')
        if self.max_epochs < 1:
            raise ConfigurationError(
                f'max_epochs must be >= 1, got {self.max_epochs}.')
        if self.patience < 1:
            raise ConfigurationError(
                f'patience must be >= 1, got {self.patience}.')
        if self.convergence_tol < 0 or self.loss_floor < 0:
            raise ConfigurationError(
                'convergence_tol and loss_floor must be >= 0.')
        if not 0 < self.psi < 1:
            raise ConfigurationError(f'psi must be in (0, 1), got {self.psi}.')
        if self.init not in INIT_MODES:
            raise ConfigurationError(
                f'init must be one of {INIT_MODES}, got {self.init!r}.')
        if self.optimizer not in OPTIMIZERS:
            raise ConfigurationError(f'optimizer must be one of {OPTIMIZERS}, '
                                     f'got {self.optimizer!r}.')
        if self.init_jitter < 0 or self.prior_weight < 0:
            raise ConfigurationError(
                'init_jitter and prior_weight must be >= 0.')

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Mapping) -> 'TrainingConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            from .utils import unknown_name_message
            raise ConfigurationError(
                unknown_name_message('training option', unknown[0], known))
        return cls(**doc)

    def override(self, **kwargs) -> 'TrainingConfig':
        """Copy with the non-None keyword arguments replaced."""
        changes = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **changes)


@dataclass
class MiningResult:
    """Coefficients mined from one trace.

    Args:
        omega (CoefficientVector): The lowest-loss coefficients.
        final_loss (float): Loss at ``omega``.
        epochs_used (int): Epochs run.
        replication_error (dict[str, float]): Per observable maximum relative
            deviation of the forward pass at ``omega`` from the trace.
        converged (bool): Whether training stopped on its convergence rule.
        initial_loss (float): Loss at the initial coefficients.
        loss_curve (list[tuple[int, float]]): ``(epoch, loss)`` checkpoints.
        substeps (int): Internal Euler steps per sample.
        source (str, optional): Where the trace came from.
    """
    omega: CoefficientVector
    final_loss: float
    epochs_used: int
    replication_error: Dict[str, float]
    converged: bool
    initial_loss: float = float('nan')
    loss_curve: List[Tuple[int, float]] = field(default_factory=list)
    substeps: int = 1
    source: Optional[str] = None

    def to_dict(self) -> dict:
        return dict(
            omega=self.omega.to_dict(),
            final_loss=self.final_loss,
            epochs_used=self.epochs_used,
            replication_error=dict(self.replication_error),
            converged=self.converged,
            initial_loss=self.initial_loss,
            loss_curve=[list(p) for p in self.loss_curve],
            substeps=self.substeps,
            source=self.source,
        )

    @classmethod
    def from_dict(cls, doc: Mapping) -> 'MiningResult':
        doc = dict(doc)
        doc['omega'] = CoefficientVector.from_dict(doc['omega'])
        doc['loss_curve'] = [tuple(p) for p in doc.get('loss_curve', [])]
        return cls(**doc)


@dataclass
class MiningFailure:
    """A trace whose mining raised instead of returning a result."""
    index: int
    kind: str
    message: str
    source: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Calibration:
    """Frozen detection context.

    Args:
        omega_ref (CoefficientVector): Reference coefficients.
        rho_m (float): Mean conformance robustness of the train set.
        test_residues (tuple[float, ...]): ``rho(test_i) - rho_m``.
        d (float): Nonconformity bound.
        k (int): Rank of ``d`` among the residues.
        interval (tuple[float, float]): Accepted residue range.
        alpha (float): Miscoverage level.
        threshold (float): Deviation threshold of the conformance formula.
        residue_mean (float): Mean of the residues.
        residue_std (float): Standard deviation of the residues.
        variance_interval (tuple[float, float]): ``mean -/+ std``.
        provenance (dict): Inputs, seeds and template hash of the run.
    """
    omega_ref: CoefficientVector
    rho_m: float
    test_residues: Tuple[float, ...]
    d: float
    k: int
    interval: Tuple[float, float]
    alpha: float = 0.05
    threshold: float = 0.01
    residue_mean: float = 0.0
    residue_std: float = 0.0
    variance_interval: Tuple[float, float] = (0.0, 0.0)
    provenance: Dict = field(default_factory=dict)

    def contains(self, residue: float) -> bool:
        lo, hi = self.interval
        return lo <= residue <= hi

    def variance_contains(self, residue: float) -> bool:
        lo, hi = self.variance_interval
        return lo <= residue <= hi

    def to_dict(self) -> dict:
        return dict(
            omega_ref=self.omega_ref.to_dict(),
            rho_m=self.rho_m,
            test_residues=list(self.test_residues),
            d=self.d,
            k=self.k,
            interval=list(self.interval),
            alpha=self.alpha,
            threshold=self.threshold,
            residue_mean=self.residue_mean,
            residue_std=self.residue_std,
            variance_interval=list(self.variance_interval),
            provenance=dict(self.provenance),
        )

    @classmethod
    def from_dict(cls, doc: Mapping) -> 'Calibration':
        doc = dict(doc)
        doc['omega_ref'] = CoefficientVector.from_dict(doc['omega_ref'])
        doc['test_residues'] = tuple(doc['test_residues'])
        doc['interval'] = tuple(doc['interval'])
        if 'variance_interval' in doc:
            doc['variance_interval'] = tuple(doc['variance_interval'])
        return cls(**doc)


@dataclass
class Verdict:
    """Detection outcome for one trace.

    ``flagged`` holds exactly when ``residue`` lies outside the calibrated
    interval. ``low_confidence`` marks verdicts whose mining did not
    converge.
    """
    robustness: float
    residue: float
    inside_interval: bool
    flagged: bool
    safety_robustness: Optional[float]
    omega: CoefficientVector
    variance_flagged: bool = False
    low_confidence: bool = False
    source: Optional[str] = None

    def to_dict(self) -> dict:
        return dict(
            robustness=self.robustness,
            residue=self.residue,
            inside_interval=self.inside_interval,
            flagged=self.flagged,
            safety_robustness=self.safety_robustness,
            omega=self.omega.to_dict(),
            variance_flagged=self.variance_flagged,
            low_confidence=self.low_confidence,
            source=self.source,
        )


@dataclass(frozen=True)
class SurrogateEstimate:
    """Monte Carlo estimate of the probability that the mined surrogate
    preserves robustness within ``delta``.

    Args:
        delta (float): Robustness tolerance.
        probability (float): Empirical ``1 - epsilon``.
        epsilon (float): Empirical exceedance rate.
        half_width (float): Half width of the binomial confidence interval.
        samples (int): Number of sampled inputs.
        failures (int): Mining failures and samples with undefined
            robustness, counted as exceedances.
        confidence (float): Confidence level of ``half_width``.
    """
    delta: float
    probability: float
    epsilon: float
    half_width: float
    samples: int
    failures: int
    confidence: float = 0.95

    def to_dict(self) -> dict:
        return asdict(self)
