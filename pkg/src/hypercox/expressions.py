"""Parsing and canonical printing of exact square-root expressions.

Grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := INT | INT '/' INT | '(' expr ')' | 'sqrt' '(' expr ')' | '-' factor

``sqrt`` routes through :func:`hypercox.tower.sqrt_extend`, so parsing a value
builds the minimal tower for it, extending left to right.  Serialization is
canonical: terms in increasing basis-mask order, reduced rational
coefficients, radicands printed recursively; it round-trips bit-identically
through the parser for pruned values.
"""

from gmpy2 import mpq

from .errors import ExprSyntaxError
from .tower import QQ, AlgNum, sqrt_extend

__all__ = ["parse_algebraic", "serialize_algnum", "ExprParser"]


class ExprParser:
    """Recursive-descent parser threading a growing tower across calls."""

    def __init__(self, tower=None):
        self.tower = tower if tower is not None else QQ

    def parse(self, text):
        self._text = text
        self._pos = 0
        value = self._expr()
        self._skip_ws()
        if self._pos != len(self._text):
            raise ExprSyntaxError("unexpected trailing input", self._pos)
        return self.tower.lift(value)

    # -- lexing helpers ------------------------------------------------------

    def _skip_ws(self):
        while self._pos < len(self._text) and self._text[self._pos].isspace():
            self._pos += 1

    def _peek(self):
        self._skip_ws()
        return self._text[self._pos] if self._pos < len(self._text) else ""

    def _expect(self, ch):
        if self._peek() != ch:
            raise ExprSyntaxError(f"expected {ch!r}", self._pos)
        self._pos += 1

    # -- grammar -------------------------------------------------------------

    def _expr(self):
        value = self._term()
        while True:
            ch = self._peek()
            if ch == "+":
                self._pos += 1
                value = self.tower.lift(value) + self._term()
            elif ch == "-":
                self._pos += 1
                value = self.tower.lift(value) - self._term()
            else:
                return value

    def _term(self):
        value = self._factor()
        while True:
            ch = self._peek()
            if ch == "*":
                self._pos += 1
                value = self.tower.lift(value) * self._factor()
            elif ch == "/":
                self._pos += 1
                value = self.tower.lift(value) / self._factor()
            else:
                return value

    def _factor(self):
        ch = self._peek()
        if ch == "-":
            self._pos += 1
            return -self._factor()
        if ch == "(":
            self._pos += 1
            value = self._expr()
            self._expect(")")
            return value
        if ch.isdigit():
            start = self._pos
            while self._pos < len(self._text) and self._text[self._pos].isdigit():
                self._pos += 1
            return self.tower.rational(mpq(int(self._text[start:self._pos])))
        if self._text.startswith("sqrt", self._pos):
            self._pos += 4
            self._expect("(")
            inner = self._expr()
            self._expect(")")
            value = sqrt_extend(self.tower.lift(inner))
            self.tower = value.tower if value.tower.levels > self.tower.levels else self.tower
            return value
        raise ExprSyntaxError("expected a number, '(', 'sqrt', or '-'", self._pos)


def parse_algebraic(text, tower=None):
    """Parse an expression into an exact AlgNum (tower grows as needed)."""
    return ExprParser(tower).parse(text)


def _rat_str(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _radical_strs(tower):
    out = []
    for lvl in range(tower.levels):
        rad = tower.chain[lvl + 1].radicand
        out.append(f"sqrt({_serialize_pruned(rad, out)})")
    return out


def _serialize_pruned(x, radical_strs=None):
    if radical_strs is None:
        radical_strs = _radical_strs(x.tower)
    if not x.coeffs:
        return "0"
    parts = []
    for mask in sorted(x.coeffs):
        c = x.coeffs[mask]
        if mask == 0:
            body = _rat_str(abs(c))
        else:
            rads = []
            mm = mask
            while mm:
                low = mm & -mm
                mm ^= low
                rads.append(radical_strs[low.bit_length() - 1])
            body = "*".join(rads)
            a = abs(c)
            if a != 1:
                body = f"{_rat_str(a)}*{body}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f" + {body}" if c > 0 else f" - {body}")
    return "".join(parts)


def serialize_algnum(x):
    """Canonical expression string: prunes to the levels actually used."""
    return _serialize_pruned(x.pruned())
