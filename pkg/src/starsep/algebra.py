"""Exact scalars on a coordinate chart.

An :class:`Expression` is an element of ``R[L_1..L_p][jets]`` where ``R`` is the
field of rational functions over Q in the holomorphic variables ``z1..zm`` and
the antiholomorphic variables ``w1..wm`` (treated as independent symbols),
``L_j = log(u_j)`` are opaque log atoms with ``u_j`` in ``R``, and jets are
commuting symbols standing for mixed partial derivatives of undetermined
functions.

Every value is kept in canonical form, so structural equality is
mathematical equality.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Union

import flint

from .errors import BranchError, DivisionByZero, JetOverflow, NotInvertible, PoleAtPoint, UnknownVariable

JET_DEGREE_LIMIT = 3

Scalar = Union[int, Fraction]


@lru_cache(maxsize=None)
def _context(m: int) -> flint.fmpq_mpoly_ctx:
    names = tuple(f"z{k}" for k in range(1, m + 1)) + tuple(f"w{k}" for k in range(1, m + 1))
    return flint.fmpq_mpoly_ctx.get(names, "deglex")


@dataclass(frozen=True)
class Chart:
    """A complex coordinate chart of dimension ``m``.

    Variables are enumerated ``z1..zm, w1..wm``; ``wk`` is the conjugate
    coordinate of ``zk``. Index ``k`` (0-based) is holomorphic for ``k < m``.
    """

    m: int

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise ValueError(f"chart dimension must be a positive integer, got {self.m!r}")

    @property
    def ctx(self) -> flint.fmpq_mpoly_ctx:
        return _context(self.m)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f"z{k}" for k in range(1, self.m + 1)) + tuple(f"w{k}" for k in range(1, self.m + 1))

    def index(self, var: str | int) -> int:
        if isinstance(var, int):
            if 0 <= var < 2 * self.m:
                return var
            raise UnknownVariable(var)
        try:
            return self.names.index(var)
        except ValueError:
            raise UnknownVariable(var) from None


def _fmpq(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    if isinstance(c, Fraction):
        return flint.fmpq(c.numerator, c.denominator)
    if isinstance(c, int):
        return flint.fmpq(c)
    raise TypeError(f"not an exact rational: {c!r}")


def _to_fraction(c: flint.fmpq) -> Fraction:
    return Fraction(int(c.p), int(c.q))


class RationalFunction:
    """Reduced quotient of two polynomials over Q with a monic denominator."""

    __slots__ = ("chart", "num", "den", "_hash", "_code")

    def __init__(self, chart: Chart, num, den):
        # callers guarantee canonical form; use make() otherwise
        self.chart = chart
        self.num = num
        self.den = den
        self._hash = None
        self._code = None

    @classmethod
    def make(cls, chart: Chart, num, den=None) -> RationalFunction:
        ctx = chart.ctx
        if den is None:
            den = ctx.constant(1)
        if den.is_zero():
            raise DivisionByZero("division by the zero rational function")
        if num.is_zero():
            return cls(chart, ctx.constant(0), ctx.constant(1))
        if not den.is_constant():
            g = num.gcd(den)
            if not g.is_one():
                num = num / g
                den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        return cls(chart, num, den)

    @classmethod
    def constant(cls, chart: Chart, c) -> RationalFunction:
        ctx = chart.ctx
        return cls(chart, ctx.constant(_fmpq(c)), ctx.constant(1))

    @classmethod
    def variable(cls, chart: Chart, var: str | int) -> RationalFunction:
        i = chart.index(var)
        return cls(chart, chart.ctx.gens()[i], chart.ctx.constant(1))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_one()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        if self.num.is_zero():
            return Fraction(0)
        return _to_fraction(self.num.leading_coefficient())

    def __add__(self, other: RationalFunction) -> RationalFunction:
        if self.den == other.den:
            return RationalFunction.make(self.chart, self.num + other.num, self.den)
        if self.den.is_one():
            return RationalFunction(self.chart, self.num * other.den + other.num, other.den)
        if other.den.is_one():
            return RationalFunction(self.chart, self.num + other.num * self.den, self.den)
        return RationalFunction.make(self.chart, self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> RationalFunction:
        return RationalFunction(self.chart, -self.num, self.den)

    def __sub__(self, other: RationalFunction) -> RationalFunction:
        return self + (-other)

    def __mul__(self, other: RationalFunction) -> RationalFunction:
        if self.den.is_one() and other.den.is_one():
            return RationalFunction(self.chart, self.num * other.num, self.den)
        return RationalFunction.make(self.chart, self.num * other.num, self.den * other.den)

    def scale(self, c) -> RationalFunction:
        c = _fmpq(c)
        if c == 0:
            return RationalFunction.constant(self.chart, 0)
        return RationalFunction(self.chart, self.num * c, self.den)

    def inverse(self) -> RationalFunction:
        if self.num.is_zero():
            raise DivisionByZero("division by the zero rational function")
        return RationalFunction.make(self.chart, self.den, self.num)

    def __truediv__(self, other: RationalFunction) -> RationalFunction:
        return self * other.inverse()

    def derivative(self, i: int) -> RationalFunction:
        dn = self.num.derivative(i)
        if self.den.is_constant():
            return RationalFunction(self.chart, dn, self.den)
        dd = self.den.derivative(i)
        return RationalFunction.make(self.chart, dn * self.den - self.num * dd, self.den * self.den)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.chart == other.chart and self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.chart.m, str(self.num), str(self.den)))
        return self._hash

    def __str__(self) -> str:
        if self.den.is_one():
            return str(self.num)
        return f"({self.num})/({self.den})"

    __repr__ = __str__

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        if self._code is None:
            self._code = (compile(f"({self.num})".replace("^", "**"), "<num>", "eval"),
                          compile(f"({self.den})".replace("^", "**"), "<den>", "eval"))
        num = complex(eval(self._code[0], {}, dict(values)))
        den = complex(eval(self._code[1], {}, dict(values)))
        if den == 0:
            raise PoleAtPoint(f"denominator {self.den} vanishes at the evaluation point")
        return num / den


class LogAtom:
    """Opaque ``log(u)`` for a fixed canonical rational function ``u``."""

    __slots__ = ("arg", "key")

    def __init__(self, arg: RationalFunction):
        if arg.is_zero():
            raise DivisionByZero("log of zero")
        self.arg = arg
        self.key = str(arg)

    def __eq__(self, other) -> bool:
        return isinstance(other, LogAtom) and self.arg == other.arg

    def __hash__(self) -> int:
        return hash(("log", self.key))

    def __str__(self) -> str:
        return f"log({self.key})"

    __repr__ = __str__


GENERIC, HOLOMORPHIC, ANTIHOLOMORPHIC = 0, 1, 2
_KIND_PREFIX = {GENERIC: "f", HOLOMORPHIC: "a", ANTIHOLOMORPHIC: "b"}


class Jet(NamedTuple):
    """Symbol for ``d_z^beta d_w^alpha`` applied to the function ``(kind, fn)``.

    Holomorphic symbols have vanishing ``w`` derivatives and antiholomorphic
    ones vanishing ``z`` derivatives.
    """

    kind: int
    fn: int
    alpha: tuple[int, ...]
    beta: tuple[int, ...]

    def shifted(self, i: int, m: int) -> Jet | None:
        if i < m:
            if self.kind == ANTIHOLOMORPHIC:
                return None
            beta = list(self.beta)
            beta[i] += 1
            return Jet(self.kind, self.fn, self.alpha, tuple(beta))
        if self.kind == HOLOMORPHIC:
            return None
        alpha = list(self.alpha)
        alpha[i - m] += 1
        return Jet(self.kind, self.fn, tuple(alpha), self.beta)

    def __str__(self) -> str:
        name = f"{_KIND_PREFIX[self.kind]}{self.fn}"
        parts = []
        for k, e in enumerate(self.beta):
            if e:
                parts.append(f"z{k + 1}" + (f"^{e}" if e > 1 else ""))
        for k, e in enumerate(self.alpha):
            if e:
                parts.append(f"w{k + 1}" + (f"^{e}" if e > 1 else ""))
        if not parts:
            return name
        return f"d({name}, {', '.join(parts)})"


_LogMono = tuple  # tuple[(LogAtom, int), ...] sorted by atom key
_JetMono = tuple  # tuple[Jet, ...] sorted
_UNIT_KEY = ((), ())


def _log_sort(mono: _LogMono):
    return tuple((a.key, e) for a, e in mono)


def _mul_logs(a: _LogMono, b: _LogMono) -> _LogMono:
    if not a:
        return b
    if not b:
        return a
    acc = {}
    for atom, e in a + b:
        acc[atom] = acc.get(atom, 0) + e
    return tuple(sorted(acc.items(), key=lambda t: t[0].key))


def _mul_jets(a: _JetMono, b: _JetMono) -> _JetMono:
    if not a:
        return b
    if not b:
        return a
    if len(a) + len(b) > JET_DEGREE_LIMIT:
        raise JetOverflow(f"jet degree {len(a) + len(b)} exceeds the limit {JET_DEGREE_LIMIT}")
    return tuple(sorted(a + b))


def _accumulate(acc: dict, key, value: RationalFunction) -> None:
    prev = acc.get(key)
    if prev is None:
        acc[key] = value
    else:
        s = prev + value
        if s.is_zero():
            del acc[key]
        else:
            acc[key] = s


class Expression:
    """Canonical element of ``Q(z, w)[log atoms][jets]`` on a fixed chart.

    Instances are immutable. Arithmetic accepts ints and Fractions as
    constants; division is only by jet- and log-free expressions.
    """

    __slots__ = ("chart", "terms", "_dcache", "_hash")

    def __init__(self, chart: Chart, terms: dict | None = None):
        self.chart = chart
        self.terms = terms if terms is not None else {}
        self._dcache = None
        self._hash = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart) -> Expression:
        return cls(chart)

    @classmethod
    def const(cls, chart: Chart, c) -> Expression:
        rf = RationalFunction.constant(chart, c)
        return cls(chart, {} if rf.is_zero() else {_UNIT_KEY: rf})

    @classmethod
    def one(cls, chart: Chart) -> Expression:
        return cls.const(chart, 1)

    @classmethod
    def rational(cls, rf: RationalFunction) -> Expression:
        return cls(rf.chart, {} if rf.is_zero() else {_UNIT_KEY: rf})

    @classmethod
    def var(cls, chart: Chart, name: str | int) -> Expression:
        return cls.rational(RationalFunction.variable(chart, name))

    @classmethod
    def log(cls, u: Expression | Scalar, chart: Chart | None = None) -> Expression:
        """The log atom of a jet- and log-free argument; ``log(1)`` is 0."""
        if not isinstance(u, Expression):
            if chart is None:
                raise TypeError("a chart is required for log of a constant")
            u = cls.const(chart, u)
        rf = u.as_rational()
        if rf.is_zero():
            raise DivisionByZero("log of zero")
        chart = u.chart
        # split into a constant and irreducible factors so that equal logs share atoms
        cn, fnum = rf.num.factor()
        cd, fden = rf.den.factor()
        parts = [(RationalFunction.constant(chart, _to_fraction(cn) / _to_fraction(cd)), 1)]
        parts += [(RationalFunction.make(chart, p), e) for p, e in fnum]
        parts += [(RationalFunction.make(chart, p), -e) for p, e in fden]
        acc: dict = {}
        for arg, e in parts:
            if arg.is_one():
                continue
            _accumulate(acc, (((LogAtom(arg), 1),), ()), RationalFunction.constant(chart, e))
        return cls(chart, acc)

    @classmethod
    def jet(cls, chart: Chart, fn: int, alpha=None, beta=None, kind: int = GENERIC) -> Expression:
        alpha = tuple(alpha) if alpha is not None else (0,) * chart.m
        beta = tuple(beta) if beta is not None else (0,) * chart.m
        if len(alpha) != chart.m or len(beta) != chart.m or min(alpha + beta) < 0:
            raise ValueError("jet multi-indices must have length m and nonnegative entries")
        if (kind == HOLOMORPHIC and any(alpha)) or (kind == ANTIHOLOMORPHIC and any(beta)):
            return cls.zero(chart)
        return cls(chart, {((), (Jet(kind, fn, alpha, beta),)): RationalFunction.constant(chart, 1)})

    @classmethod
    def function(cls, chart: Chart, fn: int) -> Expression:
        return cls.jet(chart, fn)

    @classmethod
    def holomorphic_function(cls, chart: Chart, fn: int) -> Expression:
        return cls.jet(chart, fn, kind=HOLOMORPHIC)

    @classmethod
    def antiholomorphic_function(cls, chart: Chart, fn: int) -> Expression:
        return cls.jet(chart, fn, kind=ANTIHOLOMORPHIC)

    def _coerce(self, other) -> Expression:
        if isinstance(other, Expression):
            if other.chart != self.chart:
                raise ValueError("expressions live on different charts")
            return other
        if isinstance(other, (int, Fraction, flint.fmpq)):
            return Expression.const(self.chart, other)
        if isinstance(other, RationalFunction):
            return Expression.rational(other)
        return NotImplemented

    # -- predicates and views ---------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _UNIT_KEY in self.terms)

    def as_rational(self) -> RationalFunction:
        if not self.terms:
            return RationalFunction.constant(self.chart, 0)
        if not self.is_rational():
            raise NotInvertible("expression contains log atoms or jets")
        return self.terms[_UNIT_KEY]

    def is_constant(self) -> bool:
        return self.is_rational() and self.as_rational().is_constant()

    def constant_value(self) -> Fraction:
        return self.as_rational().constant_value()

    def log_atoms(self) -> set[LogAtom]:
        return {a for logs, _ in self.terms for a, _ in logs}

    def has_logs(self) -> bool:
        return any(logs for logs, _ in self.terms)

    def jets(self) -> set[Jet]:
        return {j for _, js in self.terms for j in js}

    def has_jets(self) -> bool:
        return any(js for _, js in self.terms)

    def jet_degree(self) -> int:
        return max((len(js) for _, js in self.terms), default=0)

    def jet_parts(self) -> dict[tuple[Jet, ...], Expression]:
        """Split into ``{jet monomial: jet-free coefficient}``."""
        out: dict[tuple, dict] = {}
        for (logs, js), c in self.terms.items():
            out.setdefault(js, {})[(logs, ())] = c
        return {js: Expression(self.chart, t) for js, t in out.items()}

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> Expression:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        if not self.terms:
            return other
        acc = dict(self.terms)
        for k, v in other.terms.items():
            _accumulate(acc, k, v)
        return Expression(self.chart, acc)

    __radd__ = __add__

    def __neg__(self) -> Expression:
        return Expression(self.chart, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> Expression:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> Expression:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other) -> Expression:
        if isinstance(other, (int, Fraction, flint.fmpq)):
            if other == 0:
                return Expression(self.chart)
            return Expression(self.chart, {k: v.scale(other) for k, v in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return Expression(self.chart)
        acc: dict = {}
        for (l1, j1), c1 in self.terms.items():
            for (l2, j2), c2 in other.terms.items():
                _accumulate(acc, (_mul_logs(l1, l2), _mul_jets(j1, j2)), c1 * c2)
        return Expression(self.chart, acc)

    __rmul__ = __mul__

    def inverse(self) -> Expression:
        rf = self.as_rational()
        return Expression.rational(rf.inverse())

    def __truediv__(self, other) -> Expression:
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DivisionByZero("division by zero")
            return self * (Fraction(1) / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.is_rational():
            raise NotInvertible("can only divide by jet- and log-free expressions")
        return self * Expression.rational(other.as_rational().inverse())

    def __rtruediv__(self, other) -> Expression:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, n: int) -> Expression:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = Expression.one(self.chart)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, flint.fmpq)):
            other = Expression.const(self.chart, other)
        if not isinstance(other, Expression):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.chart.m, frozenset(self.terms.items())))
        return self._hash

    # -- calculus ----------------------------------------------------------

    def partial(self, var: str | int) -> Expression:
        chart = self.chart
        i = chart.index(var)
        if self._dcache is None:
            self._dcache = {}
        cached = self._dcache.get(i)
        if cached is not None:
            return cached
        m = chart.m
        acc: dict = {}
        for (logs, js), c in self.terms.items():
            dc = c.derivative(i)
            if not dc.is_zero():
                _accumulate(acc, (logs, js), dc)
            for pos, (atom, e) in enumerate(logs):
                du = atom.arg.derivative(i)
                if du.is_zero():
                    continue
                rest = logs[:pos] + ((atom, e - 1),) + logs[pos + 1:] if e > 1 else logs[:pos] + logs[pos + 1:]
                _accumulate(acc, (rest, js), c * (du / atom.arg).scale(e))
            for pos, jet in enumerate(js):
                nj = jet.shifted(i, m)
                if nj is None:
                    continue
                _accumulate(acc, (logs, tuple(sorted(js[:pos] + (nj,) + js[pos + 1:]))), c)
        out = Expression(chart, acc)
        self._dcache[i] = out
        return out

    def derivative(self, alpha: Iterable[int], beta: Iterable[int]) -> Expression:
        """``d_z^beta d_w^alpha`` of this expression."""
        m = self.chart.m
        e = self
        for k, n in enumerate(beta):
            for _ in range(n):
                e = e.partial(k)
        for k, n in enumerate(alpha):
            for _ in range(n):
                e = e.partial(m + k)
        return e

    # -- numerics ----------------------------------------------------------

    def evaluate(self, point: Mapping[str, complex], jets: Mapping[Jet, complex] | None = None) -> complex:
        """Evaluate numerically; ``wk`` defaults to the conjugate of ``zk``."""
        if not self.terms:
            return 0
        values = _point_values(self.chart, point)
        jets = jets or {}
        total = 0j
        for (logs, js), c in self.terms.items():
            v = c.evaluate(values)
            for atom, e in logs:
                u = atom.arg.evaluate(values)
                if u.imag == 0 and u.real <= 0:
                    raise BranchError(f"log argument {atom.key} is nonpositive real at the point")
                v *= cmath.log(u) ** e
            for j in js:
                try:
                    v *= jets[j]
                except KeyError:
                    raise UnknownVariable(f"no value assigned to jet {j}") from None
            total += v
        return total

    # -- printing ----------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][1], _log_sort(kv[0][0])))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (logs, js), c in self.sorted_terms():
            factors = []
            if not (logs or js):
                factors.append(str(c))
            elif not c.is_one():
                factors.append(f"({c})")
            for atom, e in logs:
                factors.append(f"{atom}" + (f"^{e}" if e > 1 else ""))
            factors.extend(str(j) for j in js)
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Expression({self})"


def _point_values(chart: Chart, point: Mapping[str, complex]) -> dict[str, complex]:
    values: dict[str, complex] = {}
    for name, v in point.items():
        chart.index(name)
        values[name] = complex(v)
    for k in range(1, chart.m + 1):
        z, w = f"z{k}", f"w{k}"
        if z not in values:
            raise UnknownVariable(f"no value assigned to {z}")
        values.setdefault(w, values[z].conjugate())
    return values


def partial(e: Expression, var: str | int) -> Expression:
    return e.partial(var)


def evaluate(e: Expression, point: Mapping[str, complex], jets: Mapping[Jet, complex] | None = None) -> complex:
    return e.evaluate(point, jets)


def normalize(e: Expression | str, chart: Chart | None = None) -> Expression:
    """Canonical form of an expression or of its text form."""
    if isinstance(e, Expression):
        return e
    from .grammar import parse_expression

    if chart is None:
        raise TypeError("a chart is required to parse text")
    return parse_expression(e, chart)
