"""Text grammar for chart expressions.

::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := primary ("^" ["-"] INT)?
    primary := INT | VAR | FUNC | "log(" expr ")" | "d(" FUNC ("," VAR ["^" INT])* ")" | "(" expr ")"

``VAR`` is ``z1..zm`` or ``w1..wm`` (``wk`` is the conjugate of ``zk``);
``FUNC`` is ``f1, f2, ...`` for generic functions, and ``a1, ...`` / ``b1, ...``
for holomorphic / antiholomorphic ones. ``d(f1, z1, w1^2)`` is
``d_z1 d_w1^2 f1``. Columns in error messages are 1-based.
"""

from __future__ import annotations

import re

from .algebra import ANTIHOLOMORPHIC, GENERIC, HOLOMORPHIC, Chart, Expression
from .errors import DivisionByZero, ExpressionSyntaxError, NotInvertible, UnknownVariable, ZeroDivisorInExpression

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")
_VAR = re.compile(r"([zw])([1-9]\d*)$")
_FUNC = re.compile(r"([fab])([1-9]\d*)$")
_KINDS = {"f": GENERIC, "a": HOLOMORPHIC, "b": ANTIHOLOMORPHIC}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None:  # trailing whitespace
            break
        if mt.group(1) is not None:
            tokens.append(("int", mt.group(1), mt.start(1) + 1))
        elif mt.group(2) is not None:
            tokens.append(("name", mt.group(2), mt.start(2) + 1))
        else:
            tokens.append(("op", mt.group(3), mt.start(3) + 1))
        pos = mt.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.tokens = _tokenize(text)
        self.i = 0
        self.chart = chart

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, col = self.next()
        if text != value or kind == "end":
            raise ExpressionSyntaxError(f"expected {value!r}, found {text or 'end of input'!r}", col)

    def error(self, message: str, col: int):
        raise ExpressionSyntaxError(message, col)

    def parse(self) -> Expression:
        e = self.expr()
        kind, text, col = self.peek()
        if kind != "end":
            self.error(f"unexpected {text!r}", col)
        return e

    def expr(self) -> Expression:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.next()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expression:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, col = self.next()
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                try:
                    e = e / rhs
                except DivisionByZero:
                    raise ZeroDivisorInExpression("division by zero", col) from None
                except NotInvertible:
                    self.error("divisor must be free of log atoms and function symbols", col)
        return e

    def unary(self) -> Expression:
        kind, text, _ = self.peek()
        if kind == "op" and text in ("+", "-"):
            self.next()
            e = self.unary()
            return -e if text == "-" else e
        return self.power()

    def power(self) -> Expression:
        base = self.primary()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.next()
            sign = 1
            if self.peek()[1] == "-":
                self.next()
                sign = -1
            kind, text, col = self.next()
            if kind != "int":
                self.error("exponent must be an integer literal", col)
            n = sign * int(text)
            try:
                return base ** n
            except (NotInvertible, DivisionByZero):
                self.error("negative power of a non-invertible expression", col)
        return base

    def primary(self) -> Expression:
        kind, text, col = self.next()
        chart = self.chart
        if kind == "int":
            return Expression.const(chart, int(text))
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if text == "log":
                self.expect("(")
                arg_col = self.peek()[2]
                arg = self.expr()
                self.expect(")")
                if not arg.is_rational():
                    self.error("log argument must be a rational function", arg_col)
                if arg.is_zero():
                    self.error("log of zero", arg_col)
                return Expression.log(arg)
            if text == "d":
                return self.jet()
            mv = _VAR.match(text)
            if mv:
                return self.variable(text, col)
            mf = _FUNC.match(text)
            if mf:
                return Expression.jet(chart, int(mf.group(2)), kind=_KINDS[mf.group(1)])
            self.error(f"unknown identifier {text!r}", col)
        self.error(f"unexpected {text or 'end of input'!r}", col)

    def variable(self, name: str, col: int) -> Expression:
        try:
            return Expression.var(self.chart, name)
        except UnknownVariable:
            self.error(f"variable {name!r} is not on a chart of dimension {self.chart.m}", col)

    def jet(self) -> Expression:
        self.expect("(")
        kind, text, col = self.next()
        mf = _FUNC.match(text) if kind == "name" else None
        if mf is None:
            self.error("d(...) expects a function symbol first", col)
        m = self.chart.m
        alpha, beta = [0] * m, [0] * m
        while self.peek()[1] == ",":
            self.next()
            kind, name, vcol = self.next()
            mv = _VAR.match(name) if kind == "name" else None
            if mv is None:
                self.error("expected a chart variable", vcol)
            k = int(mv.group(2)) - 1
            if k >= m:
                self.error(f"variable {name!r} is not on a chart of dimension {m}", vcol)
            n = 1
            if self.peek()[1] == "^":
                self.next()
                ik, it, icol = self.next()
                if ik != "int":
                    self.error("derivative order must be an integer literal", icol)
                n = int(it)
            if mv.group(1) == "z":
                beta[k] += n
            else:
                alpha[k] += n
        self.expect(")")
        return Expression.jet(self.chart, int(mf.group(2)), alpha, beta, kind=_KINDS[mf.group(1)])


def parse_expression(text: str, chart: Chart) -> Expression:
    """Parse ``text`` into a canonical :class:`Expression` on ``chart``."""
    return _Parser(text, chart).parse()
