import math
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DegenerateReferenceError, HorizonError, ShapeError
from ..models.template import CoefficientVector
from ..types import Trace
from .signal import CoefficientSequence, Signal, as_signal


def _fmt(value: float) -> str:
    if math.isinf(value):
        return 'inf'
    return repr(float(value)) if value != int(value) else str(int(value))


class Feature(metaclass=ABCMeta):
    """Real-valued function of one sample of a signal."""

    @abstractmethod
    def __call__(self, signal: Signal) -> np.ndarray:
        """Evaluate on every sample."""


@dataclass(frozen=True)
class LinearFeature(Feature):
    """``constant + sum(weight * x)`` where each ``x`` is a trace signal
    (``sig``) or a coefficient (``coef``).

    Args:
        terms (tuple[tuple[float, str, str]]): ``(weight, kind, name)``
            with ``kind`` in ``{'sig', 'coef'}``.
        constant (float): Offset. Defaults to 0.
    """
    terms: Tuple[Tuple[float, str, str], ...] = ()
    constant: float = 0.0

    @classmethod
    def signal(cls, name: str) -> 'LinearFeature':
        return cls(((1.0, 'sig', name), ))

    @classmethod
    def coefficient(cls, name: str) -> 'LinearFeature':
        return cls(((1.0, 'coef', name), ))

    def __call__(self, signal: Signal) -> np.ndarray:
        out = np.full(len(signal), float(self.constant))
        for weight, kind, name in self.terms:
            if kind == 'sig' and not isinstance(signal, Trace):
                raise ShapeError(f'sig({name}) needs a trace, got a '
                                 'coefficient sequence.')
            if kind == 'coef' and not isinstance(signal, CoefficientSequence):
                raise ShapeError(f'coef({name}) needs a coefficient '
                                 'sequence, got a trace.')
            out = out + weight * signal[name]
        return out

    def __str__(self) -> str:
        parts = []
        for weight, kind, name in self.terms:
            atom = f'{kind}({name})'
            if weight == 1:
                parts.append(('+', atom))
            elif weight == -1:
                parts.append(('-', atom))
            else:
                sign = '-' if weight < 0 else '+'
                parts.append((sign, f'{_fmt(abs(weight))}*{atom}'))
        if self.constant or not parts:
            sign = '-' if self.constant < 0 else '+'
            parts.append((sign, _fmt(abs(self.constant))))
        text = ('-' if parts[0][0] == '-' else '') + parts[0][1]
        for sign, atom in parts[1:]:
            text += f' {sign} {atom}'
        return text


@dataclass(frozen=True)
class MaxRelativeDeviation(Feature):
    """``max_i |(w[i] - ref[i]) / ref[i]|`` over a coefficient sequence."""
    reference: CoefficientVector

    def __post_init__(self):
        zero = [n for n, v, _ in self.reference if v == 0]
        if zero:
            raise DegenerateReferenceError(
                f'Reference coefficients {zero} are zero; relative deviation '
                'is undefined.')

    def __call__(self, signal: Signal) -> np.ndarray:
        if not isinstance(signal, CoefficientSequence):
            raise ShapeError('maxdev needs a coefficient sequence.')
        if tuple(signal.names) != self.reference.names:
            raise ShapeError('Coefficients are not aligned with the '
                             'reference.')
        ref = self.reference.as_array()
        return np.max(np.abs((signal.matrix() - ref) / ref), axis=1)

    def __str__(self) -> str:
        return 'maxdev'


@dataclass(frozen=True)
class Interval:
    """Closed time interval ``[lo, hi]``; ``hi`` may be ``inf``, meaning up
    to the last evaluable sample."""
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi) or math.isinf(self.lo):
            raise ValueError(
                f'Invalid interval [{self.lo}, {self.hi}]; need 0 <= a <= b.')

    @property
    def bounded(self) -> bool:
        return not math.isinf(self.hi)

    def indices(self, tau: float) -> Tuple[int, float]:
        """Sample offsets of the interval; the upper one may be inf."""

        def to_index(value):
            index = round(value / tau)
            if not math.isclose(index * tau, value, rel_tol=1e-9,
                                abs_tol=1e-12):
                raise ShapeError(f'Interval bound {value} is not a multiple '
                                 f'of the sampling period {tau}.')
            return index

        lo = to_index(self.lo)
        return lo, to_index(self.hi) if self.bounded else math.inf

    def __str__(self) -> str:
        return f'[{_fmt(self.lo)},{_fmt(self.hi)}]'


def _defined(values: np.ndarray) -> int:
    """Number of leading evaluable samples."""
    nan = np.flatnonzero(np.isnan(values))
    return int(nan[0]) if nan.size else len(values)


def _window(values: np.ndarray, lo: int, hi, reduce) -> np.ndarray:
    """``out[t] = reduce(values[t + lo : t + hi + 1])``, NaN where the window
    leaves the evaluable prefix. ``hi = inf`` runs to its end."""
    out = np.full(len(values), np.nan)
    size = _defined(values)
    if math.isinf(hi):
        if lo < size:
            suffix = reduce.accumulate(values[:size][::-1])[::-1]
            out[:size - lo] = suffix[lo:]
        return out
    width = hi - lo + 1
    last = size - 1 - hi
    if last >= 0:
        reduced = reduce.reduce(
            sliding_window_view(values[:size], width), axis=1)
        out[:last + 1] = reduced[lo:lo + last + 1]
    return out


class StlFormula(metaclass=ABCMeta):
    """Node of a signal temporal logic formula.

    Formulas compose with ``~`` (not), ``&`` (and) and ``|`` (or).
    """

    @abstractmethod
    def evaluate(self, signal: Signal, boolean: bool = False) -> np.ndarray:
        """Robustness, or satisfaction as 0/1 when ``boolean``, at every
        sample. Samples the formula cannot be evaluated at are NaN."""

    @property
    @abstractmethod
    def horizon(self) -> float:
        """Time the formula looks ahead of its evaluation point."""

    @property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=0)

    @property
    def children(self) -> Tuple['StlFormula', ...]:
        return ()

    def __invert__(self) -> 'StlFormula':
        return Not(self)

    def __and__(self, other: 'StlFormula') -> 'StlFormula':
        return And(self, other)

    def __or__(self, other: 'StlFormula') -> 'StlFormula':
        return Or(self, other)

    def __repr__(self) -> str:
        return f'{type(self).__name__}({self})'


class TrueFormula(StlFormula):

    def evaluate(self, signal, boolean=False):
        return np.full(len(signal), 1.0 if boolean else np.inf)

    @property
    def horizon(self):
        return 0.0

    def __eq__(self, other):
        return isinstance(other, TrueFormula)

    def __hash__(self):
        return hash('true')

    def __str__(self):
        return 'true'


@dataclass(frozen=True, repr=False)
class Predicate(StlFormula):
    """``f(sample) >= c`` or ``f(sample) <= c``."""
    feature: Feature
    op: str
    c: float = 0.0

    def __post_init__(self):
        if self.op not in ('>=', '<='):
            raise ValueError(f'Unknown predicate operator {self.op!r}.')

    def evaluate(self, signal, boolean=False):
        values = self.feature(signal)
        margin = values - self.c if self.op == '>=' else self.c - values
        if boolean:
            return (margin >= 0).astype(float)
        return margin

    @property
    def horizon(self):
        return 0.0

    def __str__(self):
        return f'{self.feature} {self.op} {_fmt(self.c)}'


@dataclass(frozen=True, repr=False)
class Not(StlFormula):
    phi: StlFormula

    def evaluate(self, signal, boolean=False):
        values = self.phi.evaluate(signal, boolean)
        return 1.0 - values if boolean else -values

    @property
    def horizon(self):
        return self.phi.horizon

    @property
    def children(self):
        return (self.phi, )

    def __str__(self):
        return f'!{self.phi}'


class _Junction(StlFormula):
    keyword = ''
    reduce = np.minimum

    def __init__(self, *args: StlFormula):
        if len(args) < 2:
            raise ValueError(f'{self.keyword} needs at least two operands.')
        self.args = tuple(args)

    def evaluate(self, signal, boolean=False):
        values = [arg.evaluate(signal, boolean) for arg in self.args]
        return self.reduce.reduce(np.stack(values), axis=0)

    @property
    def horizon(self):
        return max(arg.horizon for arg in self.args)

    @property
    def children(self):
        return self.args

    def __eq__(self, other):
        return type(other) is type(self) and other.args == self.args

    def __hash__(self):
        return hash((self.keyword, self.args))

    def __str__(self):
        return f'{self.keyword}(' + ', '.join(map(str, self.args)) + ')'


class And(_Junction):
    keyword = 'and'
    reduce = np.minimum


class Or(_Junction):
    keyword = 'or'
    reduce = np.maximum


@dataclass(frozen=True, repr=False)
class _Temporal(StlFormula):
    interval: Interval
    phi: StlFormula

    keyword = ''
    reduce = np.minimum

    def evaluate(self, signal, boolean=False):
        lo, hi = self.interval.indices(signal.tau)
        return _window(self.phi.evaluate(signal, boolean), lo, hi, self.reduce)

    @property
    def horizon(self):
        return self.interval.hi + self.phi.horizon

    @property
    def children(self):
        return (self.phi, )

    def __str__(self):
        return f'{self.keyword}{self.interval}({self.phi})'


class Globally(_Temporal):
    keyword = 'G'
    reduce = np.minimum


class Eventually(_Temporal):
    keyword = 'F'
    reduce = np.maximum


@dataclass(frozen=True, repr=False)
class Until(StlFormula):
    """``phi U_[a,b] psi``: ``psi`` holds at some ``t'`` in the interval and
    ``phi`` holds on every sample from ``t`` up to, not including, ``t'``.
    """
    interval: Interval
    phi: StlFormula
    psi: StlFormula

    def evaluate(self, signal, boolean=False):
        lo, hi = self.interval.indices(signal.tau)
        phi = self.phi.evaluate(signal, boolean)
        psi = self.psi.evaluate(signal, boolean)
        size = min(_defined(phi), _defined(psi))
        top = 1.0 if boolean else np.inf
        out = np.full(len(phi), np.nan)
        for t in range(size):
            last = size - 1 if math.isinf(hi) else t + hi
            if t + lo > size - 1 or last > size - 1:
                break
            best = -top if not boolean else 0.0
            guard = top
            for t1 in range(t, last + 1):
                if t1 >= t + lo:
                    best = max(best, min(psi[t1], guard))
                guard = min(guard, phi[t1])
            out[t] = best
        return out

    @property
    def horizon(self):
        return self.interval.hi + max(self.phi.horizon, self.psi.horizon)

    @property
    def children(self):
        return (self.phi, self.psi)

    def __str__(self):
        return f'U{self.interval}({self.phi}, {self.psi})'


def _value_at(phi: StlFormula, signal, t: int, boolean: bool) -> float:
    signal = as_signal(signal)
    if not 0 <= t < len(signal):
        raise HorizonError(
            f'Evaluation point {t} is outside a signal of {len(signal)} '
            'samples.')
    value = phi.evaluate(signal, boolean)[t]
    if np.isnan(value):
        raise HorizonError(
            f'{phi} looks {_fmt(phi.horizon)} ahead of sample {t}, beyond '
            f'the end of a signal of {len(signal)} samples.')
    return float(value)


def robustness(phi: StlFormula, signal, t: int = 0) -> float:
    """Quantitative robustness of ``phi`` at sample ``t``.

    Args:
        phi (StlFormula): The formula.
        signal (Trace | CoefficientSequence | list[CoefficientVector]):
            Time-domain trace or index-domain coefficient sequence.
        t (int): Sample index. Defaults to 0.

    Returns:
        float: Positive when satisfied, negative when violated.
    """
    return _value_at(phi, signal, t, boolean=False)


def satisfied(phi: StlFormula, signal, t: int = 0) -> bool:
    """Boolean satisfaction of ``phi`` at sample ``t``."""
    return _value_at(phi, signal, t, boolean=True) > 0.5
