import math
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ShapeError, SimulationDiverged
from ..types import InputSchedule, Trace, input_matrix, same_period
from .template import CoefficientVector, ModelTemplate

# Internal RK4 step is chosen so that h * max|eig(A)| stays below this.
RK4_STEP_FACTOR = 0.05


def compose_substeps(step: np.ndarray, forcing: np.ndarray,
                     substeps: int) -> Tuple[np.ndarray, np.ndarray]:
    """Compose ``substeps`` applications of ``x <- step @ x + forcing @ v``
    with ``v`` held constant.

    Returns ``(step^s, sum_{m<s} step^m @ forcing)``, read off the power of
    the block matrix ``[[step, forcing], [0, I]]``.
    """
    n, p = forcing.shape
    Z = np.zeros((n + p, n + p))
    Z[:n, :n] = step
    Z[:n, n:] = forcing
    Z[n:, n:] = np.eye(p)
    Zs = np.linalg.matrix_power(Z, int(substeps))
    return Zs[:n, :n], Zs[:n, n:]


def rk4_propagators(A: np.ndarray, tau: float,
                    substeps: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per-sample propagators of classical RK4 on ``dx/dt = A x + v`` with
    ``v`` held over the sample."""
    n = A.shape[0]
    h = tau / substeps
    hA = h * A
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    eye = np.eye(n)
    R = eye + hA + hA2 / 2 + hA3 / 6 + hA3 @ hA / 24
    S = eye + hA / 2 + hA2 / 6 + hA3 / 24
    return compose_substeps(R, h * S, substeps)


def default_rk4_substeps(A: np.ndarray, tau: float) -> int:
    radius = float(np.max(np.abs(np.linalg.eigvals(A)))) if A.size else 0.0
    return max(1, math.ceil(tau * radius / RK4_STEP_FACTOR))


def integrate_reference(template: ModelTemplate,
                        omega: CoefficientVector,
                        u: Union[InputSchedule, Mapping[str, np.ndarray]],
                        x0: Sequence[float],
                        tau: float,
                        N: int,
                        substeps: Optional[int] = None,
                        drift: Optional[Sequence[float]] = None,
                        t0: float = 0.0) -> Trace:
    """Solve ``dX/dt = A X + B U (+ c)`` with fixed-step classical RK4.

    This is the ground-truth oracle. Inputs are zero-order held over each
    sample period and the solver advances ``substeps`` equal internal steps
    per sample.

    Args:
        template (ModelTemplate): The model structure.
        omega (CoefficientVector): Coefficients bound to ``template``.
        u (InputSchedule | Mapping[str, np.ndarray]): Inputs by channel.
        x0 (Sequence[float]): Initial state, one value per variable.
        tau (float): Sampling period.
        N (int): Number of steps; the trace holds ``N + 1`` samples.
        substeps (int, optional): Internal steps per sample. Defaults to the
            smallest count with ``h * max|eig(A)| <= 0.05``.
        drift (Sequence[float], optional): Constant forcing ``c``.
        t0 (float): Start time. Defaults to 0.

    Returns:
        Trace: Every state variable plus the active input channels.
    """
    if not tau > 0:
        raise ShapeError(f'tau must be > 0, got {tau}.')
    if N < 1:
        raise ShapeError(f'N must be >= 1, got {N}.')
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (template.n, ) or not np.all(np.isfinite(x0)):
        raise ShapeError(f'x0 must hold {template.n} finite values.')
    A, B = template.matrices(omega)
    if substeps is None:
        substeps = default_rk4_substeps(A, tau)
    times = t0 + tau * np.arange(N + 1)
    U = input_matrix(u, template.input_names, template.input_active, times)
    V = U @ B.T
    if drift is not None:
        V = V + np.asarray(drift, dtype=float)[None, :]
    Phi, Gamma = rk4_propagators(A, tau, substeps)
    forcing = V @ Gamma.T

    X = np.empty((N + 1, template.n))
    X[0] = x0
    with np.errstate(over='ignore', invalid='ignore'):
        for k in range(N):
            X[k + 1] = Phi @ X[k] + forcing[k]
    finite = np.all(np.isfinite(X), axis=1)
    if not finite.all():
        raise SimulationDiverged(int(np.argmin(finite)))

    signals = {name: X[:, i] for i, name in enumerate(template.variable_names)}
    for i, name in enumerate(template.input_names):
        if template.b_pattern[i].free:
            signals[name] = U[:, i]
    return Trace(tau, signals, t0=t0, time_unit=template.time_unit)


def trace_distance(a: Trace,
                   b: Trace,
                   signals: Optional[Sequence[str]] = None) -> float:
    """Root-mean-square error averaged over signals.

    Args:
        a (Trace): First trace.
        b (Trace): Second trace.
        signals (Sequence[str], optional): The signals to compare, usually
            the template observables. Defaults to all signals of ``a``.
    """
    names = list(signals) if signals is not None else a.names
    if not names:
        raise ShapeError('No signals to compare.')
    if len(a) != len(b) or not same_period(a.tau, b.tau):
        raise ShapeError(f'Cannot compare {a!r} with {b!r}.')
    errors = []
    for name in names:
        if name not in a or name not in b:
            raise ShapeError(f'Signal `{name}` is not in both traces.')
        diff = a[name] - b[name]
        errors.append(math.sqrt(float(np.mean(diff * diff))))
    return float(np.mean(errors))
