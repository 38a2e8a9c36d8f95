from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import (Dict, Iterator, List, Mapping, Optional, Sequence, Tuple,
                    Union)

import numpy as np

from ..errors import ShapeError, TemplateError
from ..utils import fingerprint


class SlotSign(str, Enum):
    """Sign label of one coefficient slot of a template."""
    ZERO = '0'
    POSITIVE = '+'
    NEGATIVE = '-'
    ANY = '*'

    @classmethod
    def parse(cls, value) -> 'SlotSign':
        aliases = {
            0: cls.ZERO,
            'zero': cls.ZERO,
            'free-positive': cls.POSITIVE,
            'positive': cls.POSITIVE,
            'free-negative': cls.NEGATIVE,
            'negative': cls.NEGATIVE,
            'free-any': cls.ANY,
            'any': cls.ANY,
        }
        if isinstance(value, SlotSign):
            return value
        if isinstance(value, str) and value in cls._value2member_map_:
            return cls(value)
        if value in aliases:
            return aliases[value]
        raise TemplateError(f'Invalid sign label {value!r}, expected one of '
                            "'0', '+', '-', '*'.")

    @property
    def free(self) -> bool:
        return self is not SlotSign.ZERO

    def admits(self, value: float) -> bool:
        if self is SlotSign.POSITIVE:
            return value >= 0
        if self is SlotSign.NEGATIVE:
            return value <= 0
        if self is SlotSign.ZERO:
            return value == 0
        return True

    def project(self, value: float) -> float:
        if self is SlotSign.POSITIVE:
            return max(value, 0.0)
        if self is SlotSign.NEGATIVE:
            return min(value, 0.0)
        if self is SlotSign.ZERO:
            return 0.0
        return value


@dataclass(frozen=True)
class Slot:
    """One free coefficient of a template: ``a[row, col]`` or ``b[row]``."""
    matrix: str
    row: int
    col: int
    sign: SlotSign
    name: str


@dataclass(frozen=True)
class ModelTemplate:
    """Structure of ``dX/dt = A X + B U`` with observability mask ``beta``.

    Args:
        variable_names (tuple[str]): One identifier per state variable.
        input_names (tuple[str]): One potential input channel per variable.
        a_pattern (tuple[tuple[SlotSign]]): ``n x n`` sign labels of ``A``.
        b_pattern (tuple[SlotSign]): Sign labels of the diagonal of ``B``.
        beta (tuple[bool]): Whether each variable is an observable output.
        time_unit (str): Label of the model time unit. Defaults to ``'s'``.
        coefficient_names (dict, optional): Display names of slots, keyed by
            the default slot names ``a[x_i,x_j]`` / ``b[x_i]``.
    """
    variable_names: Tuple[str, ...]
    input_names: Tuple[str, ...]
    a_pattern: Tuple[Tuple[SlotSign, ...], ...]
    b_pattern: Tuple[SlotSign, ...]
    beta: Tuple[bool, ...]
    time_unit: str = 's'
    coefficient_names: Optional[Mapping[str, str]] = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, 'variable_names', tuple(self.variable_names))
        set_(self, 'input_names', tuple(self.input_names))
        set_(self, 'a_pattern',
             tuple(tuple(SlotSign.parse(s) for s in row)
                   for row in self.a_pattern))
        set_(self, 'b_pattern',
             tuple(SlotSign.parse(s) for s in self.b_pattern))
        set_(self, 'beta', tuple(bool(b) for b in self.beta))
        set_(self, 'coefficient_names', dict(self.coefficient_names or {}))
        self.validate()

    def validate(self):
        n = self.n
        if n == 0:
            raise TemplateError('A template needs at least one variable.')
        if len(set(self.variable_names)) != n:
            raise TemplateError('Variable names must be unique.')
        for field_name, length in (('input_names', len(self.input_names)),
                                   ('b_pattern', len(self.b_pattern)),
                                   ('beta', len(self.beta)),
                                   ('a_pattern', len(self.a_pattern))):
            if length != n:
                raise TemplateError(
                    f'Expected {n} entries, got {length}.',
                    location=field_name)
        for i, row in enumerate(self.a_pattern):
            if len(row) != n:
                raise TemplateError(f'Expected {n} entries, got {len(row)}.',
                                    location=f'a_pattern[{i}]')
            if not any(s.free for s in row):
                raise TemplateError(
                    f'Variable `{self.variable_names[i]}` has no non-zero '
                    'entry in its row of A.',
                    location=f'a_pattern[{i}]')
        if not any(self.beta):
            raise TemplateError('At least one variable must be observable.',
                                location='beta')
        active = [name for name, s in zip(self.input_names, self.b_pattern)
                  if s.free]
        if len(set(active)) != len(active):
            raise TemplateError('Active input channels must be unique.',
                                location='input_names')
        clash = set(active) & set(self.variable_names)
        if clash:
            raise TemplateError(
                f'Input names clash with variable names: {sorted(clash)}.',
                location='input_names')

    @property
    def n(self) -> int:
        return len(self.variable_names)

    @property
    def slots(self) -> List[Slot]:
        """Free slots in canonical order: row-major over A, then the
        diagonal of B."""
        slots = []
        names = self.variable_names
        for i, row in enumerate(self.a_pattern):
            for j, sign in enumerate(row):
                if sign.free:
                    key = f'a[{names[i]},{names[j]}]'
                    slots.append(
                        Slot('a', i, j, sign,
                             self.coefficient_names.get(key, key)))
        for i, sign in enumerate(self.b_pattern):
            if sign.free:
                key = f'b[{names[i]}]'
                slots.append(
                    Slot('b', i, i, sign, self.coefficient_names.get(key,
                                                                     key)))
        return slots

    @property
    def coefficient_count(self) -> int:
        return len(self.slots)

    @property
    def observables(self) -> List[str]:
        return [v for v, b in zip(self.variable_names, self.beta) if b]

    @property
    def active_inputs(self) -> List[str]:
        return [u for u, s in zip(self.input_names, self.b_pattern) if s.free]

    @property
    def input_active(self) -> List[bool]:
        return [s.free for s in self.b_pattern]

    def required_signals(self) -> List[str]:
        """Signals a trace must carry to mine this template."""
        return self.observables + self.active_inputs

    def check_trace(self, trace) -> None:
        missing = [s for s in self.required_signals() if s not in trace]
        if missing:
            raise ShapeError(f'Trace is missing signals {missing} required by '
                             'the template.')

    def to_dict(self) -> dict:
        doc = dict(
            variables=list(self.variable_names),
            inputs=list(self.input_names),
            a_pattern=[[s.value for s in row] for row in self.a_pattern],
            b_pattern=[s.value for s in self.b_pattern],
            beta=list(self.beta),
            time_unit=self.time_unit,
        )
        if self.coefficient_names:
            doc['coefficient_names'] = dict(self.coefficient_names)
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> 'ModelTemplate':
        from ..parsers.template_parser import parse_template
        return parse_template(doc)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'ModelTemplate':
        from ..parsers.template_parser import load_template
        return load_template(path)

    def fingerprint(self) -> str:
        return fingerprint(self.to_dict())

    def matrices(self, omega: 'CoefficientVector'
                 ) -> Tuple[np.ndarray, np.ndarray]:
        """Assemble ``A`` and the diagonal ``B`` from bound coefficients."""
        omega.check_binds(self)
        A = np.zeros((self.n, self.n))
        B = np.zeros((self.n, self.n))
        for slot, value in zip(self.slots, omega.values):
            if slot.matrix == 'a':
                A[slot.row, slot.col] = value
            else:
                B[slot.row, slot.row] = value
        return A, B

    def bind(self,
             values: Union[Sequence[float], Mapping[str, float]],
             units: Optional[Sequence[str]] = None) -> 'CoefficientVector':
        """Bind concrete values to the free slots.

        ``values`` is either in canonical slot order or keyed by slot name.
        """
        slots = self.slots
        if isinstance(values, Mapping):
            missing = [s.name for s in slots if s.name not in values]
            if missing:
                raise TemplateError(f'No value for slots {missing}.')
            values = [values[s.name] for s in slots]
        if units is None:
            units = [
                f'1/{self.time_unit}' if s.matrix == 'a' else ''
                for s in slots
            ]
        return CoefficientVector(
            tuple(s.name for s in slots), tuple(float(v) for v in values),
            tuple(units))

    def from_matrices(self, A: np.ndarray,
                      B: np.ndarray) -> 'CoefficientVector':
        values = [
            A[s.row, s.col] if s.matrix == 'a' else B[s.row, s.row]
            for s in self.slots
        ]
        return self.bind(values)


@dataclass(frozen=True)
class CoefficientVector:
    """Named, ordered coefficient values; the object that is mined,
    compared and stored.

    Two vectors over the same template are index-aligned because both
    follow the template's canonical slot order.
    """
    names: Tuple[str, ...]
    values: Tuple[float, ...]
    units: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'names', tuple(self.names))
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, 'values', values)
        units = tuple(self.units) or ('', ) * len(self.names)
        object.__setattr__(self, 'units', units)
        if not (len(self.names) == len(self.values) == len(self.units)):
            raise ShapeError('Coefficient names, values and units must have '
                             'the same length.')
        if len(set(self.names)) != len(self.names):
            raise ShapeError('Coefficient names must be unique.')

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[Tuple[str, float, str]]:
        return iter(zip(self.names, self.values, self.units))

    def __getitem__(self, name: str) -> float:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            from ..utils import unknown_name_message
            raise KeyError(
                unknown_name_message('coefficient', name, self.names))

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.names, self.values))

    def replace(self, values: Sequence[float]) -> 'CoefficientVector':
        return CoefficientVector(self.names, tuple(values), self.units)

    def aligned_with(self, other: 'CoefficientVector') -> bool:
        return self.names == other.names

    def check_binds(self, template: ModelTemplate) -> None:
        slots = template.slots
        if len(slots) != len(self):
            raise ShapeError(f'Expected {len(slots)} coefficients for the '
                             f'template, got {len(self)}.')
        if tuple(s.name for s in slots) != self.names:
            raise ShapeError('Coefficient names do not follow the template '
                             'slot order.')
        for slot, value in zip(slots, self.values):
            if not np.isfinite(value):
                raise ShapeError(f'Coefficient `{slot.name}` is not finite.')
            if not slot.sign.admits(value):
                raise TemplateError(
                    f'Coefficient `{slot.name}` = {value} violates its sign '
                    f'label `{slot.sign.value}`.')

    def to_dict(self) -> dict:
        return dict(
            names=list(self.names),
            values=list(self.values),
            units=list(self.units))

    @classmethod
    def from_dict(cls, doc: Mapping) -> 'CoefficientVector':
        if 'names' in doc:
            return cls(
                tuple(doc['names']), tuple(doc['values']),
                tuple(doc.get('units', ())))
        return cls(tuple(doc), tuple(doc.values()))
