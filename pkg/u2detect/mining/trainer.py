import functools
import hashlib
import math
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.optimize import least_squares

from ..errors import (ConfigurationError, ForwardPassDiverged,
                      TrainingDiverged)
from ..models.template import CoefficientVector, ModelTemplate, SlotSign
from ..schema import MiningFailure, MiningResult, TrainingConfig
from ..types import Trace, input_matrix
from ..utils import get_logger, track_map
from .network import (DihNetwork, induce_network, initial_state,
                      loss_and_gradient, replication_error,
                      residuals_and_jacobian)

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-12
# Loss checkpoints kept in MiningResult.loss_curve.
CURVE_POINTS = 20
# scipy rejects tolerances below machine epsilon.
LSQ_MIN_TOL = 1e-15


class _Fit(NamedTuple):
    weights: np.ndarray
    loss: float
    epochs: int
    converged: bool
    history: List[float]


def _random_magnitude(rng: np.random.Generator) -> float:
    return float(10**rng.uniform(-2, 0))


def _signed(sign: SlotSign, magnitude: float, rng: np.random.Generator,
            hint: float = 0.0) -> float:
    if sign is SlotSign.NEGATIVE:
        return -magnitude
    if sign is SlotSign.POSITIVE:
        return magnitude
    if hint != 0:
        return math.copysign(magnitude, hint)
    return magnitude if rng.random() < 0.5 else -magnitude


def _scale_estimates(template: ModelTemplate, trace: Trace) -> dict:
    """Least-squares fit of the observable one-step differences.

    Returns rough estimates for the slots whose regressors are all measured,
    keyed by slot index.
    """
    slots = template.slots
    U = input_matrix(trace, template.input_names, template.input_active,
                     trace.times)
    estimates = {}
    for i, name in enumerate(template.variable_names):
        if not template.beta[i]:
            continue
        row = [(w, s) for w, s in enumerate(slots) if s.row == i]
        regressors = []
        for w, s in row:
            if s.matrix == 'b':
                regressors.append(U[:-1, i])
            elif template.beta[s.col]:
                regressors.append(trace[template.variable_names[s.col]][:-1])
            else:
                regressors = None
                break
        if not regressors:
            continue
        y = trace[name]
        target = np.diff(y) / trace.tau
        X = np.stack(regressors, axis=1)
        solution, *_ = np.linalg.lstsq(X, target, rcond=None)
        for (w, _), value in zip(row, solution):
            estimates[w] = float(value)
    return estimates


def initial_coefficients(template: ModelTemplate,
                         trace: Trace,
                         config: TrainingConfig,
                         nominal: Optional[CoefficientVector] = None
                         ) -> CoefficientVector:
    """Starting point of mining.

    ``scale`` rounds a least-squares estimate of every measurable slot to its
    order of magnitude, ``random`` draws log-uniform magnitudes in
    ``[0.01, 1]`` and ``nominal`` starts from the given coefficients,
    jittered by ``config.init_jitter``. Slots ``scale`` cannot estimate fall
    back to ``random``.
    """
    rng = np.random.default_rng(config.seed)
    slots = template.slots
    if config.init == 'nominal':
        if nominal is None:
            raise ConfigurationError(
                'init="nominal" needs reference coefficients.')
        nominal.check_binds(template)
        if config.init_jitter == 0:
            return nominal
        # Keyed by the trace so a trace mines the same wherever it appears.
        digest = hashlib.sha256(trace.to_array().tobytes()).digest()
        rng = np.random.default_rng(
            [config.seed, int.from_bytes(digest[:8], 'little')])
        factors = np.exp(
            rng.uniform(-config.init_jitter, config.init_jitter,
                        len(slots)))
        return nominal.replace(
            [float(v) for v in nominal.as_array() * factors])
    estimates = (
        _scale_estimates(template, trace) if config.init == 'scale' else {})
    values = []
    for w, slot in enumerate(slots):
        magnitude = _random_magnitude(rng)
        estimate = estimates.get(w, 0.0)
        if np.isfinite(estimate) and estimate != 0:
            magnitude = 10.0**round(math.log10(abs(estimate)))
        values.append(_signed(slot.sign, magnitude, rng, hint=estimate))
    return template.bind(values)


class _Adam:
    """Adaptive-moment update with per-weight step ``lr * scale``."""

    def __init__(self, lr: float, scale: np.ndarray):
        self.lr = lr
        self.scale = scale
        self.m = np.zeros_like(scale)
        self.v = np.zeros_like(scale)
        self.t = 0

    def step(self, w: np.ndarray, grad: np.ndarray) -> np.ndarray:
        b1, b2 = ADAM_BETAS
        self.t += 1
        self.m = b1 * self.m + (1 - b1) * grad
        self.v = b2 * self.v + (1 - b2) * grad * grad
        m_hat = self.m / (1 - b1**self.t)
        v_hat = self.v / (1 - b2**self.t)
        return w - self.lr * self.scale * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def _curve_summary(history: List[float]) -> list:
    if len(history) <= CURVE_POINTS:
        epochs = range(len(history))
    else:
        epochs = sorted(
            set(np.linspace(0, len(history) - 1, CURVE_POINTS).astype(int)))
    return [(int(e), float(history[e])) for e in epochs]


def _fit_adam(net: DihNetwork, trace: Trace, config: TrainingConfig,
              x0: np.ndarray) -> _Fit:
    w = net.weights.as_array()
    scale = np.where(np.abs(w) > 0, np.abs(w), 1.0)
    optimizer = _Adam(config.learning_rate, scale)
    history: List[float] = []
    best_loss, best_w = math.inf, w.copy()
    stalled, converged, epoch = 0, False, 0

    for epoch in range(config.max_epochs + 1):
        try:
            value, grad = loss_and_gradient(
                net, trace, config.normalize_loss_per_signal, x0)
        except ForwardPassDiverged as e:
            raise TrainingDiverged(epoch, str(e)) from e
        if not (math.isfinite(value) and np.all(np.isfinite(grad))):
            raise TrainingDiverged(epoch)
        history.append(value)
        if value < best_loss:
            improvement = ((best_loss - value) / best_loss
                           if math.isfinite(best_loss) and best_loss > 0 else
                           math.inf)
            best_loss, best_w = value, w.copy()
        else:
            improvement = 0.0
        if value <= config.loss_floor:
            converged = True
            break
        if epoch > 0:
            if improvement < config.convergence_tol:
                stalled += 1
            else:
                stalled = 0
            if stalled >= config.patience:
                converged = True
                break
        if epoch == config.max_epochs:
            break
        get_logger().debug(f'epoch {epoch}: loss {value:.6e}')
        w = optimizer.step(w, grad)
        net.set_weights(w)
        w = net.weights.as_array()
    return _Fit(best_w, best_loss, epoch, converged, history)


class _LeastSquaresProblem:
    """Residuals of one trace in fitting coordinates.

    Sign-labelled slots move in ``log |w|``, the others in ``w / |w0|``.
    A ridge of weight ``prior`` pulls the coordinates towards the start.
    """

    def __init__(self, net: DihNetwork, trace: Trace,
                 config: TrainingConfig, x0: np.ndarray):
        self.net = net
        self.trace = trace
        self.normalize = config.normalize_loss_per_signal
        self.x0 = x0
        w0 = net.weights.as_array()
        self.logged = np.array([
            slot.sign in (SlotSign.POSITIVE, SlotSign.NEGATIVE) and v != 0
            for slot, v in zip(net.template.slots, w0)
        ])
        self.sign = np.where(w0 < 0, -1.0, 1.0)
        self.scale = np.where(np.abs(w0) > 0, np.abs(w0), 1.0)
        self.theta0 = np.where(self.logged,
                               np.log(np.where(self.logged, np.abs(w0), 1.0)),
                               w0 / self.scale)
        self.history: List[float] = []
        self._key = None
        self._cache = None
        r0, J0 = self.evaluate(self.theta0)
        self.size = len(r0) + len(w0)
        self.initial_loss = float(r0 @ r0)
        if not (math.isfinite(self.initial_loss)
                and np.all(np.isfinite(J0))):
            raise TrainingDiverged(0)
        self.prior = config.prior_weight * float(
            np.linalg.norm(J0 * self._chain(self.theta0), 2))

    def weights(self, theta: np.ndarray) -> np.ndarray:
        with np.errstate(over='ignore'):
            return np.where(self.logged, self.sign * np.exp(theta),
                            theta * self.scale)

    def _chain(self, theta: np.ndarray) -> np.ndarray:
        return np.where(self.logged, self.weights(theta), self.scale)

    def evaluate(self, theta: np.ndarray):
        key = theta.tobytes()
        if key != self._key:
            self.net.set_weights(self.weights(theta))
            self._cache = residuals_and_jacobian(self.net, self.trace,
                                                 self.normalize, self.x0)
            self._key = key
        return self._cache

    def residuals(self, theta: np.ndarray) -> np.ndarray:
        try:
            r, _ = self.evaluate(theta)
        except ForwardPassDiverged:
            self.history.append(math.inf)
            return np.full(self.size, np.inf)
        self.history.append(float(r @ r))
        return np.concatenate([r, self.prior * (theta - self.theta0)])

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        _, J = self.evaluate(theta)
        return np.vstack(
            [J * self._chain(theta), self.prior * np.eye(len(theta))])


def _fit_least_squares(net: DihNetwork, trace: Trace,
                       config: TrainingConfig, x0: np.ndarray) -> _Fit:
    try:
        problem = _LeastSquaresProblem(net, trace, config, x0)
    except ForwardPassDiverged as e:
        raise TrainingDiverged(0, str(e)) from e
    if problem.initial_loss <= config.loss_floor:
        return _Fit(net.weights.as_array(), problem.initial_loss, 0, True,
                    [problem.initial_loss])
    tol = max(config.convergence_tol, LSQ_MIN_TOL)
    solution = least_squares(
        problem.residuals,
        problem.theta0,
        jac=problem.jacobian,
        method='trf',
        x_scale=1.0,
        ftol=tol,
        xtol=tol,
        gtol=None,
        max_nfev=config.max_epochs)
    w = problem.weights(solution.x)
    r, _ = problem.evaluate(solution.x)
    value = float(r @ r)
    if not math.isfinite(value):
        raise TrainingDiverged(solution.nfev)
    get_logger().debug(f'least squares: {solution.message}')
    converged = solution.status > 0 or value <= config.loss_floor
    return _Fit(w, value, solution.nfev, converged, problem.history)


def mine_coefficients(template: ModelTemplate,
                      trace: Trace,
                      config: Optional[TrainingConfig] = None,
                      nominal: Optional[CoefficientVector] = None,
                      source: Optional[str] = None) -> MiningResult:
    """Mine the coefficients of ``template`` from one trace.

    Args:
        template (ModelTemplate): The model structure.
        trace (Trace): Observables and active inputs, sampled every
            ``trace.tau``.
        config (TrainingConfig, optional): Training options. Defaults to
            ``TrainingConfig()``.
        nominal (CoefficientVector, optional): Start point for
            ``init='nominal'``.
        source (str, optional): Label stored in the result.

    Returns:
        MiningResult: The lowest-loss coefficients found.
    """
    config = config or TrainingConfig()
    template.check_trace(trace)
    init = initial_coefficients(template, trace, config, nominal)
    net = induce_network(template, trace.tau, omega=init, psi=config.psi)
    x0 = initial_state(template, trace)

    if config.optimizer == 'least_squares':
        fit = _fit_least_squares(net, trace, config, x0)
    else:
        fit = _fit_adam(net, trace, config, x0)

    net.set_weights(fit.weights)
    result = MiningResult(
        omega=net.weights,
        final_loss=fit.loss,
        epochs_used=fit.epochs,
        replication_error=replication_error(net, trace, x0=x0),
        converged=fit.converged,
        initial_loss=fit.history[0],
        loss_curve=_curve_summary(fit.history),
        substeps=net.substeps,
        source=source)
    get_logger().info(
        f'Mined {source or "trace"}: loss {fit.history[0]:.3e} -> '
        f'{fit.loss:.3e} in {fit.epochs} epochs '
        f'({"converged" if fit.converged else "not converged"}).')
    return result


def _mine_one(task, template, config, nominal):
    index, trace, source = task
    try:
        return mine_coefficients(template, trace, config, nominal, source)
    except (ValueError, RuntimeError) as e:
        get_logger().warning(f'Mining {source or index} failed: {e}')
        return MiningFailure(index, type(e).__name__, str(e), source)


def mine_trace_sequence(
        template: ModelTemplate,
        traces: Sequence[Trace],
        config: Optional[TrainingConfig] = None,
        nominal: Optional[CoefficientVector] = None,
        jobs: int = 1,
        sources: Optional[Sequence[str]] = None
) -> List[Union[MiningResult, MiningFailure]]:
    """Mine every trace independently, keeping the order.

    A trace whose mining raises yields a :class:`MiningFailure` in its
    place; the remaining traces are still mined.

    Args:
        template (ModelTemplate): The model structure.
        traces (Sequence[Trace]): The trace segments.
        config (TrainingConfig, optional): Training options.
        nominal (CoefficientVector, optional): Start point for
            ``init='nominal'``.
        jobs (int): Worker processes. Defaults to 1.
        sources (Sequence[str], optional): Labels stored in the results.
    """
    config = config or TrainingConfig()
    sources = list(sources) if sources is not None else [None] * len(traces)
    tasks = [(i, trace, src)
             for i, (trace, src) in enumerate(zip(traces, sources))]
    worker = functools.partial(
        _mine_one, template=template, config=config, nominal=nominal)
    return track_map(worker, tasks, jobs=jobs, desc='mine')
