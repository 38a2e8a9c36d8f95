import copy
import math
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ConfigurationError, ForwardPassDiverged, ShapeError
from ..models.integrate import compose_substeps
from ..models.template import CoefficientVector, ModelTemplate, SlotSign
from ..types import InputSchedule, Trace, input_matrix, same_period
from ..utils import get_logger

# Magnitude of the weights a freshly induced network starts from.
DEFAULT_WEIGHT_SCALE = 0.1


@dataclass(frozen=True)
class DihCell:
    """One recurrent cell, i.e. one state variable.

    Args:
        index (int): Position of the variable in the template.
        name (str): Variable name.
        connections (tuple[tuple[int, int]]): ``(source cell, weight index)``
            pairs, one per non-zero entry of the variable's row of A.
        input_name (str, optional): External input channel, if any.
        input_weight (int, optional): Weight index of the input tap.
        observable (bool): Whether the cell output is compared to data.
    """
    index: int
    name: str
    connections: Tuple[Tuple[int, int], ...]
    input_name: Optional[str]
    input_weight: Optional[int]
    observable: bool

    @property
    def has_self_loop(self) -> bool:
        return any(src == self.index for src, _ in self.connections)


def default_weights(template: ModelTemplate,
                    scale: float = DEFAULT_WEIGHT_SCALE) -> CoefficientVector:
    values = [
        -scale if slot.sign is SlotSign.NEGATIVE else scale
        for slot in template.slots
    ]
    return template.bind(values)


class DihNetwork:
    """Recurrent network whose wiring is the sparsity pattern of a template
    and whose weights are the template coefficients.

    The network advances ``substeps`` forward Euler steps of size
    ``tau / substeps`` per sample. With ``substeps=1`` one sample is
    ``x[k+1] = x[k] + tau * (A x[k] + B u[k])``.

    Args:
        template (ModelTemplate): The model structure.
        tau (float): Sampling period of the traces it runs on.
        weights (CoefficientVector): Initial coefficients.
        substeps (int): Internal Euler steps per sample. Defaults to 1.
    """

    def __init__(self,
                 template: ModelTemplate,
                 tau: float,
                 weights: CoefficientVector,
                 substeps: int = 1):
        if not tau > 0:
            raise ConfigurationError(f'tau must be > 0, got {tau}.')
        if int(substeps) < 1:
            raise ConfigurationError(
                f'substeps must be >= 1, got {substeps}.')
        self.template = template
        self.tau = float(tau)
        self.substeps = int(substeps)
        weights.check_binds(template)
        self._weights = weights
        self._propagators = None
        self._derivatives = None

        slots = template.slots
        self.cells: List[DihCell] = []
        for i, name in enumerate(template.variable_names):
            connections = tuple((s.col, w) for w, s in enumerate(slots)
                                if s.matrix == 'a' and s.row == i)
            taps = [w for w, s in enumerate(slots)
                    if s.matrix == 'b' and s.row == i]
            self.cells.append(
                DihCell(
                    index=i,
                    name=name,
                    connections=connections,
                    input_name=template.input_names[i] if taps else None,
                    input_weight=taps[0] if taps else None,
                    observable=template.beta[i]))

    @property
    def step(self) -> float:
        """The internal Euler step size."""
        return self.tau / self.substeps

    @property
    def weights(self) -> CoefficientVector:
        return self._weights

    @property
    def parameter_count(self) -> int:
        return len(self._weights)

    @property
    def edge_count(self) -> int:
        return sum(len(cell.connections) for cell in self.cells)

    @property
    def input_count(self) -> int:
        return sum(cell.input_name is not None for cell in self.cells)

    def set_weights(self, values: Union[Sequence[float], np.ndarray]):
        """Replace the weights, projecting each onto its sign label."""
        projected = [
            slot.sign.project(float(v))
            for slot, v in zip(self.template.slots, values)
        ]
        if len(projected) != self.parameter_count:
            raise ShapeError(f'Expected {self.parameter_count} weights, got '
                             f'{len(projected)}.')
        self._weights = self._weights.replace(projected)
        self._propagators = None
        self._derivatives = None

    def copy(self) -> 'DihNetwork':
        return copy.copy(self)

    def matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.template.matrices(self._weights)

    def _euler_block(self) -> Tuple[np.ndarray, np.ndarray]:
        A, B = self.matrices()
        h = self.step
        return np.eye(self.template.n) + h * A, h * B

    def propagators(self) -> Tuple[np.ndarray, np.ndarray]:
        """Per-sample ``(Phi, Gamma)`` with ``x[k+1] = Phi x[k] + Gamma u[k]``.
        """
        if self._propagators is None:
            M, H = self._euler_block()
            self._propagators = compose_substeps(M, H, self.substeps)
        return self._propagators

    def propagator_derivatives(
            self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """``(dPhi/dw, dGamma/dw)`` for every weight ``w``.

        The derivative of ``Z^s`` along ``E`` is the upper right block of
        ``[[Z, E], [0, Z]]^s``.
        """
        if self._derivatives is not None:
            return self._derivatives
        n = self.template.n
        M, H = self._euler_block()
        q = 2 * n
        Z = np.zeros((q, q))
        Z[:n, :n] = M
        Z[:n, n:] = H
        Z[n:, n:] = np.eye(n)
        derivatives = []
        for slot in self.template.slots:
            E = np.zeros((q, q))
            if slot.matrix == 'a':
                E[slot.row, slot.col] = self.step
            else:
                E[slot.row, n + slot.row] = self.step
            big = np.zeros((2 * q, 2 * q))
            big[:q, :q] = Z
            big[:q, q:] = E
            big[q:, q:] = Z
            D = np.linalg.matrix_power(big, self.substeps)[:q, q:]
            derivatives.append((D[:n, :n], D[:n, n:]))
        self._derivatives = derivatives
        return derivatives

    def describe(self) -> List[str]:
        """Human readable wiring, one line per cell."""
        slots = self.template.slots
        names = self.template.variable_names
        lines = []
        for cell in self.cells:
            parts = []
            for src, w in cell.connections:
                if src == cell.index:
                    label = 'self-loop'
                else:
                    label = f'from {names[src]}'
                parts.append(f'{label} ({slots[w].name})')
            if cell.input_name is not None:
                parts.append(f'input {cell.input_name} '
                             f'({slots[cell.input_weight].name})')
            tag = 'observable' if cell.observable else 'hidden'
            lines.append(f'cell {cell.name} [{tag}]: ' + ', '.join(parts))
        return lines

    def to_dot(self) -> str:
        """The wiring as a Graphviz digraph."""
        slots = self.template.slots
        names = self.template.variable_names
        lines = ['digraph dih_rnn {', '  rankdir=LR;']
        for cell in self.cells:
            shape = 'doublecircle' if cell.observable else 'circle'
            lines.append(f'  "{cell.name}" [shape={shape}];')
        for cell in self.cells:
            for src, w in cell.connections:
                lines.append(f'  "{names[src]}" -> "{cell.name}" '
                             f'[label="{slots[w].name}"];')
            if cell.input_name is not None:
                lines.append(f'  "{cell.input_name}" [shape=box];')
                lines.append(
                    f'  "{cell.input_name}" -> "{cell.name}" '
                    f'[label="{slots[cell.input_weight].name}"];')
        lines.append('}')
        return '\n'.join(lines) + '\n'

    def __repr__(self) -> str:
        return (f'{type(self).__name__}(cells={len(self.cells)}, '
                f'edges={self.edge_count}, inputs={self.input_count}, '
                f'tau={self.tau}, substeps={self.substeps})')


def validate_step_size(estimate: Union[CoefficientVector, Sequence[float]],
                       psi: float,
                       template: Optional[ModelTemplate] = None) -> float:
    """Largest sampling period for which forward Euler stays within the
    relative error factor ``psi``: ``min_i sqrt(2 psi) / |a_ii|``.

    Args:
        estimate (CoefficientVector | Sequence[float]): Coefficient
            estimates bound to ``template``, or the diagonal of A directly.
        psi (float): Error factor in (0, 1).
        template (ModelTemplate, optional): Needed to locate the diagonal
            when ``estimate`` is a coefficient vector.

    Returns:
        float: The bound. ``math.inf`` when every diagonal entry is zero.
    """
    if not 0 < psi < 1:
        raise ConfigurationError(f'psi must be in (0, 1), got {psi}.')
    if isinstance(estimate, CoefficientVector):
        if template is None:
            raise ConfigurationError(
                'A template is required to read the diagonal of A from a '
                'coefficient vector.')
        A, _ = template.matrices(estimate)
        diagonal = np.diag(A)
    else:
        diagonal = np.asarray(estimate, dtype=float)
    magnitudes = np.abs(diagonal[diagonal != 0])
    if magnitudes.size == 0:
        get_logger().warning(
            'All diagonal coefficients are zero; the step size is unbounded.')
        return math.inf
    return float(math.sqrt(2 * psi) / magnitudes.max())


def induce_network(template: ModelTemplate,
                   tau: float,
                   omega: Optional[CoefficientVector] = None,
                   psi: Optional[float] = None,
                   substeps: Optional[int] = None) -> DihNetwork:
    """Build the network of a template.

    Args:
        template (ModelTemplate): The model structure.
        tau (float): Sampling period.
        omega (CoefficientVector, optional): Initial weights. Defaults to
            sign-consistent weights of magnitude 0.1.
        psi (float, optional): Error factor. With ``omega`` it fixes the
            number of internal steps per sample so the internal step obeys
            :func:`validate_step_size`.
        substeps (int, optional): Explicit internal step count, overrides
            ``psi``.

    Returns:
        DihNetwork: The induced network.
    """
    weights = omega if omega is not None else default_weights(template)
    if substeps is None:
        substeps = 1
        if omega is not None and psi is not None:
            bound = validate_step_size(omega, psi, template)
            if math.isfinite(bound):
                substeps = max(1, math.ceil(tau / bound - 1e-9))
    net = DihNetwork(template, tau, weights, substeps)
    get_logger().debug(f'Induced {net!r}')
    return net


def _input_array(net: DihNetwork, u, times: np.ndarray) -> np.ndarray:
    return input_matrix(u, net.template.input_names,
                        net.template.input_active, times)


def _rollout(Phi: np.ndarray, forcing: np.ndarray,
             x0: np.ndarray) -> np.ndarray:
    X = np.empty((len(forcing) + 1, len(x0)))
    X[0] = x0
    with np.errstate(over='ignore', invalid='ignore'):
        for k in range(len(forcing)):
            X[k + 1] = Phi @ X[k] + forcing[k]
    finite = np.all(np.isfinite(X), axis=1)
    if not finite.all():
        raise ForwardPassDiverged(int(np.argmin(finite)))
    return X


def forward_pass(net: DihNetwork,
                 u: Union[InputSchedule, Mapping[str, np.ndarray], Trace],
                 x0: Sequence[float],
                 N: int,
                 t0: float = 0.0) -> Trace:
    """Run the network for ``N`` samples.

    Args:
        net (DihNetwork): The network.
        u (InputSchedule | Mapping[str, np.ndarray] | Trace): Inputs,
            either a schedule or sampled trajectories.
        x0 (Sequence[float]): Initial state of every cell.
        N (int): Number of steps.
        t0 (float): Start time. Defaults to 0.

    Returns:
        Trace: The full state, hidden cells included.
    """
    if N < 1:
        raise ShapeError(f'N must be >= 1, got {N}.')
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.template.n, ) or not np.all(np.isfinite(x0)):
        raise ShapeError(f'x0 must hold {net.template.n} finite values.')
    times = t0 + net.tau * np.arange(N + 1)
    U = _input_array(net, u, times)
    Phi, Gamma = net.propagators()
    X = _rollout(Phi, U[:-1] @ Gamma.T, x0)
    return Trace(
        net.tau, {
            name: X[:, i]
            for i, name in enumerate(net.template.variable_names)
        },
        t0=t0,
        time_unit=net.template.time_unit)


def initial_state(template: ModelTemplate, trace: Trace) -> np.ndarray:
    """Observables start at the first sample of the trace, hidden variables
    at zero."""
    return np.array([
        trace[name][0] if observable else 0.0
        for name, observable in zip(template.variable_names, template.beta)
    ])


def signal_weights(template: ModelTemplate, trace: Trace,
                   normalize: bool) -> np.ndarray:
    """Loss weight of every variable: zero for hidden ones, ``1 / peak^2``
    for observables when normalizing."""
    weights = np.zeros(template.n)
    for i, name in enumerate(template.variable_names):
        if not template.beta[i]:
            continue
        peak = float(np.max(np.abs(trace[name]))) if normalize else 1.0
        weights[i] = 1.0 / peak**2 if peak > 1e-12 else 1.0
    return weights


class _Evaluation:
    """Forward pass of a network against one trace."""

    def __init__(self, net: DihNetwork, trace: Trace,
                 normalize: bool, x0: Optional[Sequence[float]]):
        template = net.template
        if not same_period(net.tau, trace.tau):
            raise ConfigurationError(
                f'The trace is sampled every {trace.tau}, the network every '
                f'{net.tau}.')
        template.check_trace(trace)
        self.net = net
        self.x0 = (initial_state(template, trace)
                   if x0 is None else np.asarray(x0, dtype=float))
        self.U = _input_array(net, trace, trace.times)
        self.Y = np.zeros((len(trace), template.n))
        for i, name in enumerate(template.variable_names):
            if template.beta[i]:
                self.Y[:, i] = trace[name]
        self.w = signal_weights(template, trace, normalize)
        Phi, Gamma = net.propagators()
        self.X = _rollout(Phi, self.U[:-1] @ Gamma.T, self.x0)
        self.residual = self.X - self.Y
        self.steps = len(trace) - 1

    @property
    def value(self) -> float:
        r = self.residual[1:]
        with np.errstate(over='ignore', invalid='ignore'):
            return float(np.sum(self.w * np.mean(r * r, axis=0)))

    def gradient(self) -> np.ndarray:
        Phi, _ = self.net.propagators()
        g = 2.0 * self.w * self.residual / self.steps
        g[0] = 0.0
        lam = np.empty_like(g)
        lam[-1] = g[-1]
        with np.errstate(over='ignore', invalid='ignore'):
            for k in range(len(g) - 2, -1, -1):
                lam[k] = g[k] + Phi.T @ lam[k + 1]
            d_phi = lam[1:].T @ self.X[:-1]
            d_gamma = lam[1:].T @ self.U[:-1]
        return np.array([
            np.sum(d_phi * dP) + np.sum(d_gamma * dG)
            for dP, dG in self.net.propagator_derivatives()
        ])

    def weighted_residual(self) -> np.ndarray:
        """Observable residuals scaled so their squares sum to
        :attr:`value`, one signal after the other."""
        observed = np.flatnonzero(self.net.template.beta)
        root = np.sqrt(self.w[observed] / self.steps)
        return (self.residual[1:, observed] * root).ravel(order='F')

    def jacobian(self) -> np.ndarray:
        """Derivatives of :meth:`weighted_residual`, one column per weight,
        by forward sensitivities ``S[k+1] = Phi S[k] + dPhi x[k] +
        dGamma u[k]``."""
        Phi, _ = self.net.propagators()
        derivatives = self.net.propagator_derivatives()
        d_phi = np.stack([dP for dP, _ in derivatives])
        d_gamma = np.stack([dG for _, dG in derivatives])
        forcing = (np.einsum('pij,kj->kip', d_phi, self.X[:-1]) +
                   np.einsum('pij,kj->kip', d_gamma, self.U[:-1]))
        S = np.zeros((len(self.X), self.net.template.n, len(derivatives)))
        with np.errstate(over='ignore', invalid='ignore'):
            for k in range(self.steps):
                S[k + 1] = Phi @ S[k] + forcing[k]
        observed = np.flatnonzero(self.net.template.beta)
        root = np.sqrt(self.w[observed] / self.steps)
        J = S[1:, observed, :] * root[None, :, None]
        return J.transpose(1, 0, 2).reshape(-1, len(derivatives))


def loss(net: DihNetwork,
         trace: Trace,
         normalize: bool = True,
         x0: Optional[Sequence[float]] = None) -> float:
    """Squared error of the forward pass against a trace.

    The error is averaged over the ``N`` predicted samples and summed over
    observable signals. Hidden variables never contribute.

    Args:
        net (DihNetwork): The network.
        trace (Trace): Observed trace with observables and active inputs.
        normalize (bool): Divide each signal's error by its squared peak.
            Defaults to True.
        x0 (Sequence[float], optional): Initial state. Defaults to
            :func:`initial_state`.
    """
    return _Evaluation(net, trace, normalize, x0).value


def gradient(net: DihNetwork,
             trace: Trace,
             normalize: bool = True,
             x0: Optional[Sequence[float]] = None) -> np.ndarray:
    """Exact partial derivatives of :func:`loss`, one per weight, by
    backpropagation through time."""
    return _Evaluation(net, trace, normalize, x0).gradient()


def loss_and_gradient(net: DihNetwork,
                      trace: Trace,
                      normalize: bool = True,
                      x0: Optional[Sequence[float]] = None
                      ) -> Tuple[float, np.ndarray]:
    evaluation = _Evaluation(net, trace, normalize, x0)
    return evaluation.value, evaluation.gradient()


def residuals_and_jacobian(net: DihNetwork,
                           trace: Trace,
                           normalize: bool = True,
                           x0: Optional[Sequence[float]] = None
                           ) -> Tuple[np.ndarray, np.ndarray]:
    """Residual vector whose squares sum to :func:`loss`, and its exact
    Jacobian with respect to the weights.

    Returns:
        tuple[np.ndarray, np.ndarray]: Residuals of shape ``(m, )`` and the
        Jacobian of shape ``(m, parameter_count)``.
    """
    evaluation = _Evaluation(net, trace, normalize, x0)
    return evaluation.weighted_residual(), evaluation.jacobian()


def replication_error(net: DihNetwork,
                      trace: Trace,
                      floor: float = 1e-6,
                      x0: Optional[Sequence[float]] = None) -> dict:
    """Maximum relative deviation ``|x - y| / |y|`` of every observable,
    over the samples where ``|y|`` exceeds ``floor``."""
    evaluation = _Evaluation(net, trace, False, x0)
    errors = {}
    for i, name in enumerate(net.template.variable_names):
        if not net.template.beta[i]:
            continue
        y = evaluation.Y[:, i]
        mask = np.abs(y) > floor
        if not mask.any():
            errors[name] = 0.0
            continue
        errors[name] = float(
            np.max(np.abs(evaluation.residual[mask, i]) / np.abs(y[mask])))
    return errors
