import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import (Dict, Iterable, List, Mapping, Optional, Sequence, Tuple,
                    Union)

import numpy as np

from .errors import ShapeError

# Relative tolerance when comparing sampling periods and grid times.
TIME_RTOL = 1e-9


def _frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def same_period(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=TIME_RTOL, abs_tol=0.0)


@dataclass(frozen=True)
class Trajectory:
    """Samples of one real signal on a uniform grid.

    Args:
        t0 (float): Time of the first sample.
        tau (float): Sampling period.
        values (np.ndarray): The samples, value ``k`` is at ``t0 + k * tau``.
    """
    t0: float
    tau: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen_array(self.values))
        if not self.tau > 0:
            raise ShapeError(
                f'The sampling period must be > 0, got {self.tau}.')
        if self.values.ndim != 1 or len(self.values) < 2:
            raise ShapeError('A trajectory needs at least 2 samples.')

    def __len__(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.tau * np.arange(len(self.values))


class Trace:
    """Uniformly sampled multi-signal time series.

    All member trajectories share ``t0``, ``tau`` and the number of samples.
    A trace of ``N`` steps holds ``N + 1`` samples.

    Args:
        tau (float): The shared sampling period.
        signals (Mapping[str, array-like | Trajectory]): Signal name to
            samples.
        t0 (float): Time of the first sample. Defaults to 0.
        time_unit (str): Label of the time unit, used for the CSV time
            column ``time_<unit>``. Defaults to ``'s'``.
    """

    def __init__(self,
                 tau: float,
                 signals: Mapping[str, Union[Sequence[float], np.ndarray,
                                             Trajectory]],
                 t0: float = 0.0,
                 time_unit: str = 's'):
        if not signals:
            raise ShapeError('A trace needs at least one signal.')
        self.tau = float(tau)
        self.t0 = float(t0)
        self.time_unit = time_unit
        self._signals: Dict[str, Trajectory] = {}
        length = None
        for name, value in signals.items():
            if isinstance(value, Trajectory):
                if not (same_period(value.tau, self.tau)
                        and math.isclose(value.t0, self.t0, abs_tol=1e-12)):
                    raise ShapeError(
                        f'Signal `{name}` does not share tau/t0 with the '
                        'trace.')
                traj = value
            else:
                traj = Trajectory(self.t0, self.tau, value)
            if length is None:
                length = len(traj)
            elif len(traj) != length:
                raise ShapeError(f'Signal `{name}` has {len(traj)} samples, '
                                 f'expected {length}.')
            self._signals[name] = traj
        self._length = length

    @property
    def signals(self) -> Dict[str, Trajectory]:
        return dict(self._signals)

    @property
    def names(self) -> List[str]:
        return list(self._signals)

    @property
    def steps(self) -> int:
        return self._length - 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.tau * np.arange(self._length)

    def __len__(self) -> int:
        return self._length

    def __contains__(self, name: str) -> bool:
        return name in self._signals

    def __getitem__(self, name: str) -> np.ndarray:
        if name not in self._signals:
            from .utils import unknown_name_message
            raise KeyError(unknown_name_message('signal', name, self.names))
        return self._signals[name].values

    def select(self, names: Iterable[str]) -> 'Trace':
        return Trace(
            self.tau, {name: self._signals[name]
                       for name in names}, self.t0, self.time_unit)

    def with_signals(self, **extra) -> 'Trace':
        signals = dict(self._signals)
        signals.update(extra)
        return Trace(self.tau, signals, self.t0, self.time_unit)

    def to_array(self, names: Optional[Sequence[str]] = None) -> np.ndarray:
        names = self.names if names is None else names
        return np.stack([self[name] for name in names], axis=1)

    def to_csv(self, path: Union[str, Path]) -> str:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow([f'time_{self.time_unit}'] + self.names)
            data = np.column_stack([self.times, self.to_array()])
            for row in data:
                writer.writerow([repr(float(v)) for v in row])
        return str(path)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> 'Trace':
        with open(path, newline='') as f:
            rows = list(csv.reader(f))
        if not rows or not rows[0] or not rows[0][0].startswith('time_'):
            raise ShapeError(
                f'{path}: the header row must start with a `time_<unit>` '
                'column.')
        header = rows[0]
        try:
            data = np.array([[float(v) for v in row] for row in rows[1:]
                             if row])
        except ValueError as e:
            raise ShapeError(f'{path}: non-numeric sample ({e}).') from e
        if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != len(header):
            raise ShapeError(f'{path}: expected at least 2 rows of '
                             f'{len(header)} columns.')
        times = data[:, 0]
        steps = np.diff(times)
        tau = float(steps.mean())
        if not np.allclose(steps, tau, rtol=1e-6, atol=1e-12):
            raise ShapeError(f'{path}: samples are not uniformly spaced.')
        signals = {name: data[:, i + 1] for i, name in enumerate(header[1:])}
        return cls(tau, signals, t0=float(times[0]), time_unit=header[0][5:])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (same_period(self.tau, other.tau) and self.t0 == other.t0
                and set(self.names) == set(other.names) and all(
                    np.array_equal(self[n], other[n]) for n in self.names))

    def __repr__(self) -> str:
        return (f'Trace(tau={self.tau}, samples={len(self)}, '
                f'signals={self.names})')


@dataclass(frozen=True)
class InputSchedule:
    """Piecewise-constant input functions of time.

    Each channel is a tuple of ``(start_time, value)`` breakpoints with
    strictly increasing start times. The value before the first breakpoint
    is 0. Channels not listed are identically 0.
    """
    channels: Mapping[str, Tuple[Tuple[float, float], ...]] = field(
        default_factory=dict)

    def __post_init__(self):
        channels = {}
        for name, points in self.channels.items():
            points = tuple((float(t), float(v)) for t, v in points)
            starts = [t for t, _ in points]
            if any(b <= a for a, b in zip(starts, starts[1:])):
                raise ValueError(
                    f'Breakpoints of input `{name}` must be strictly '
                    'increasing in time.')
            channels[name] = points
        object.__setattr__(self, 'channels', channels)

    @classmethod
    def constant(cls, **values: float) -> 'InputSchedule':
        return cls({name: ((0.0, value), ) for name, value in values.items()})

    @classmethod
    def impulses(cls, tau: float,
                 **events: Iterable[Tuple[float, float]]) -> 'InputSchedule':
        """Build single-sample rectangular pulses.

        Each event ``(time, amount)`` becomes a pulse of height
        ``amount / tau`` on ``[time, time + tau)``, so its area equals the
        amount. Overlapping pulses add up.
        """
        channels = {}
        for name, channel_events in events.items():
            deltas: Dict[float, float] = {}
            for time, amount in channel_events:
                if amount == 0:
                    continue
                for t, dv in ((time, amount / tau), (time + tau,
                                                      -amount / tau)):
                    key = round(t / tau) * tau if math.isclose(
                        t / tau, round(t / tau), abs_tol=1e-9) else t
                    deltas[key] = deltas.get(key, 0.0) + dv
            points, level = [], 0.0
            for t in sorted(deltas):
                level += deltas[t]
                if abs(level) < 1e-12 * max(1.0, abs(deltas[t])):
                    level = 0.0
                points.append((t, level))
            channels[name] = tuple(points)
        return cls(channels)

    @property
    def names(self) -> List[str]:
        return list(self.channels)

    def value(self, name: str, t: float) -> float:
        points = self.channels.get(name, ())
        current = 0.0
        for start, value in points:
            if start <= t + TIME_RTOL * max(1.0, abs(t)):
                current = value
            else:
                break
        return current

    def sample(self, name: str, times: np.ndarray) -> np.ndarray:
        """Evaluate a channel on a time grid (zero-order hold)."""
        points = self.channels.get(name, ())
        if not points:
            return np.zeros(len(times))
        starts = np.array([t for t, _ in points])
        values = np.concatenate([[0.0], [v for _, v in points]])
        tol = TIME_RTOL * np.maximum(1.0, np.abs(times))
        index = np.searchsorted(starts, times + tol, side='right')
        return values[index]

    def __add__(self, other: 'InputSchedule') -> 'InputSchedule':
        channels = {}
        for name in set(self.channels) | set(other.channels):
            starts = sorted({t for t, _ in self.channels.get(name, ())}
                            | {t for t, _ in other.channels.get(name, ())})
            channels[name] = tuple(
                (t, self.value(name, t) + other.value(name, t))
                for t in starts)
        return InputSchedule(channels)

    def to_dict(self) -> dict:
        return {name: [list(p) for p in points]
                for name, points in self.channels.items()}


def input_matrix(u: Union[InputSchedule, Mapping[str, np.ndarray], Trace],
                 input_names: Sequence[str],
                 active: Sequence[bool],
                 times: np.ndarray) -> np.ndarray:
    """Stack the input channels of a template into a ``(len(times), n)``
    array.

    ``u`` is either a schedule, evaluated on ``times``, or sampled
    trajectories keyed by channel name (a trace works too). Inactive
    channels are filled with zeros; active channels must be present in
    sampled inputs.
    """
    out = np.zeros((len(times), len(input_names)))
    for i, (name, on) in enumerate(zip(input_names, active)):
        if not on:
            continue
        if isinstance(u, InputSchedule):
            out[:, i] = u.sample(name, times)
            continue
        if name not in u:
            raise ShapeError(f'Missing input trajectory `{name}`.')
        values = np.asarray(u[name], dtype=float)
        if len(values) < len(times) - 1:
            raise ShapeError(f'Input `{name}` has {len(values)} samples, '
                             f'need at least {len(times) - 1}.')
        out[:min(len(values), len(times)), i] = values[:len(times)]
    return out
