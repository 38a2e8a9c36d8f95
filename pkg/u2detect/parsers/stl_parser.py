import math
import re
from typing import Dict, Tuple

from ..errors import FormulaSyntaxError

_NUMBER = re.compile(r'(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?|inf')
_KEYWORD = re.compile(r'[A-Za-z_][A-Za-z_0-9]*')


class StlParser:
    """Recursive-descent parser of the prefix STL syntax.

    ``true``, ``!phi``, ``and(phi, psi, ...)``, ``or(phi, psi, ...)``,
    ``G[a,b](phi)``, ``F[a,b](phi)``, ``U[a,b](phi, psi)`` and linear
    predicates ``expr >= expr`` / ``expr <= expr`` over ``sig(name)``,
    ``coef(name)`` and numbers. ``>`` and ``<`` read as ``>=`` and ``<=``.
    """

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise FormulaSyntaxError(msg, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, token: str) -> bool:
        self.skip()
        return self.text.startswith(token, self.pos)

    def accept(self, token: str) -> bool:
        if self.peek(token):
            self.pos += len(token)
            return True
        return False

    def expect(self, token: str):
        if not self.accept(token):
            self.error(f'Expected `{token}`')

    def keyword(self) -> str:
        self.skip()
        match = _KEYWORD.match(self.text, self.pos)
        return match.group(0) if match else ''

    def number(self) -> float:
        self.skip()
        match = _NUMBER.match(self.text, self.pos)
        if not match:
            self.error('Expected a number')
        self.pos = match.end()
        return float(match.group(0))

    def parse(self):
        formula = self.formula()
        self.skip()
        if self.pos != len(self.text):
            self.error('Unexpected trailing input')
        return formula

    def formula(self):
        from ..stl.formula import (And, Eventually, Globally, Not, Or,
                                   TrueFormula, Until)
        self.skip()
        if self.pos >= len(self.text):
            self.error('Unexpected end of formula')
        if self.accept('!'):
            return Not(self.formula())
        word = self.keyword()
        if word == 'true':
            self.pos += len(word)
            return TrueFormula()
        if word in ('and', 'or') and self._followed_by('('):
            self.pos += len(word)
            args = self.operands()
            if len(args) < 2:
                self.error(f'`{word}` needs at least two operands')
            return (And if word == 'and' else Or)(*args)
        if word in ('G', 'F', 'U') and self._followed_by('['):
            self.pos += len(word)
            interval = self.interval()
            args = self.operands()
            if word == 'U':
                if len(args) != 2:
                    self.error('`U` takes exactly two operands')
                return Until(interval, *args)
            if len(args) != 1:
                self.error(f'`{word}` takes exactly one operand')
            return (Globally if word == 'G' else Eventually)(interval,
                                                              args[0])
        if self.peek('(') and not self._looks_like_expression():
            self.expect('(')
            formula = self.formula()
            self.expect(')')
            return formula
        return self.predicate()

    def _followed_by(self, token: str) -> bool:
        word = self.keyword()
        rest = self.text[self.pos + len(word):].lstrip()
        return rest.startswith(token)

    def _looks_like_expression(self) -> bool:
        """Whether a parenthesis opens an arithmetic group of a predicate
        rather than a nested formula."""
        start = self.pos
        try:
            self.expect('(')
            self.expression()
            self.expect(')')
            self.skip()
            return (self.pos < len(self.text)
                    and self.text[self.pos] in '+-*<>')
        except FormulaSyntaxError:
            return False
        finally:
            self.pos = start

    def operands(self):
        self.expect('(')
        args = [self.formula()]
        while self.accept(','):
            args.append(self.formula())
        self.expect(')')
        return args

    def interval(self):
        from ..stl.formula import Interval
        self.expect('[')
        lo = self.number()
        self.expect(',')
        hi = self.number()
        self.expect(']')
        if math.isinf(lo):
            self.error('The lower bound of an interval must be finite')
        try:
            return Interval(lo, hi)
        except ValueError as e:
            self.error(str(e))

    def predicate(self):
        from ..stl.formula import LinearFeature, Predicate
        lhs = self.expression()
        self.skip()
        for token, op in (('>=', '>='), ('<=', '<='), ('>', '>='),
                          ('<', '<=')):
            if self.accept(token):
                break
        else:
            self.error('Expected a comparison `>=` or `<=`')
        rhs = self.expression()
        terms, constant = _combine(lhs, rhs, -1.0)
        if not terms:
            self.error('A predicate must refer to a signal or coefficient')
        feature = LinearFeature(
            tuple((w, kind, name) for (kind, name), w in terms.items()),
            constant)
        return Predicate(feature, op, 0.0)

    def expression(self) -> Tuple[Dict, float]:
        """Linear expression as ``({(kind, name): weight}, constant)``."""
        sign = -1.0 if self.accept('-') else 1.0
        value = _scaled(self.term(), sign)
        while True:
            if self.accept('+'):
                value = _combine(value, self.term(), 1.0)
            elif self.accept('-'):
                value = _combine(value, self.term(), -1.0)
            else:
                return value

    def term(self) -> Tuple[Dict, float]:
        value = self.factor()
        while self.accept('*'):
            other = self.factor()
            if value[0] and other[0]:
                self.error('Predicates must be linear')
            if value[0]:
                value = _scaled(value, other[1])
            else:
                value = _scaled(other, value[1])
        return value

    def factor(self) -> Tuple[Dict, float]:
        if self.accept('-'):
            return _scaled(self.factor(), -1.0)
        if self.accept('('):
            value = self.expression()
            self.expect(')')
            return value
        word = self.keyword()
        if word in ('sig', 'coef') and self._followed_by('('):
            self.pos += len(word)
            self.expect('(')
            end = self.text.find(')', self.pos)
            if end < 0:
                self.error('Unclosed name')
            name = self.text[self.pos:end].strip()
            if not name:
                self.error('Empty name')
            self.pos = end + 1
            return {(word, name): 1.0}, 0.0
        if word and word != 'inf':
            self.error(f'Unknown name `{word}`, use sig({word}) or '
                       f'coef({word})')
        return {}, self.number()


def _scaled(value, factor):
    terms, constant = value
    return {k: w * factor for k, w in terms.items()}, constant * factor


def _combine(a, b, sign):
    terms = dict(a[0])
    for key, w in b[0].items():
        terms[key] = terms.get(key, 0.0) + sign * w
    terms = {k: w for k, w in terms.items() if w != 0}
    return terms, a[1] + sign * b[1]


def parse_formula(text: str):
    """Parse STL text into a :class:`~u2detect.stl.StlFormula`.

    Examples:
        >>> parse_formula('G[0,420](sig(G) - 70 >= 0)')
    """
    return StlParser(text).parse()
