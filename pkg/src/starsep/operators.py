"""Differential and bidifferential operators with Expression coefficients.

A :class:`DiffOperator` is ``sum c[alpha, beta] d_z^beta d_w^alpha`` where
``alpha`` is the antiholomorphic and ``beta`` the holomorphic multi-index.
Coefficients sit to the left of the derivatives. Products of operators are
compositions.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from typing import Iterator, Mapping

from .algebra import Chart, Expression
from .errors import NotInvertible
from .series import FormalSeries

MultiIndex = tuple[int, ...]


def multi_indices(m: int, degree: int) -> list[MultiIndex]:
    """All multi-indices of length ``m`` and total degree ``degree``, lexicographically ascending."""
    if m == 1:
        return [(degree,)]
    out = []
    for first in range(degree + 1):
        for rest in multi_indices(m - 1, degree - first):
            out.append((first,) + rest)
    return out


def _below(mu: MultiIndex) -> Iterator[MultiIndex]:
    return itertools.product(*(range(k + 1) for k in mu))


def _binom(mu: MultiIndex, nu: MultiIndex) -> int:
    out = 1
    for a, b in zip(mu, nu):
        out *= comb(a, b)
    return out


def _add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def _fmt_derivs(prefix: str, idx: MultiIndex) -> list[str]:
    return [f"{prefix}{k + 1}" + (f"^{e}" if e > 1 else "") for k, e in enumerate(idx) if e]


def _accumulate(acc: dict, key, value: Expression) -> None:
    prev = acc.get(key)
    acc[key] = value if prev is None else prev + value


class DiffOperator:
    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping[tuple[MultiIndex, MultiIndex], Expression] | None = None):
        self.chart = chart
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart) -> DiffOperator:
        return cls(chart)

    @classmethod
    def multiplication(cls, e: Expression) -> DiffOperator:
        z = (0,) * e.chart.m
        return cls(e.chart, {(z, z): e})

    @classmethod
    def identity(cls, chart: Chart) -> DiffOperator:
        return cls.multiplication(Expression.one(chart))

    @classmethod
    def monomial(cls, chart: Chart, alpha: MultiIndex, beta: MultiIndex, coeff: Expression | None = None) -> DiffOperator:
        return cls(chart, {(tuple(alpha), tuple(beta)): coeff if coeff is not None else Expression.one(chart)})

    @classmethod
    def d_z(cls, chart: Chart, k: int) -> DiffOperator:
        beta = tuple(int(i == k) for i in range(chart.m))
        return cls.monomial(chart, (0,) * chart.m, beta)

    @classmethod
    def d_w(cls, chart: Chart, k: int) -> DiffOperator:
        alpha = tuple(int(i == k) for i in range(chart.m))
        return cls.monomial(chart, alpha, (0,) * chart.m)

    def _coerce(self, other) -> DiffOperator:
        if isinstance(other, DiffOperator):
            return other
        if isinstance(other, (int, Fraction, Expression)):
            e = other if isinstance(other, Expression) else Expression.const(self.chart, other)
            return DiffOperator.multiplication(e)
        return NotImplemented

    # -- structure ---------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def order(self) -> int:
        return max((sum(a) + sum(b) for a, b in self.terms), default=0)

    def is_holomorphic(self) -> bool:
        """True if only holomorphic derivatives occur."""
        return all(not any(a) for a, _ in self.terms)

    def coefficient(self, alpha: MultiIndex, beta: MultiIndex) -> Expression:
        return self.terms.get((tuple(alpha), tuple(beta)), Expression.zero(self.chart))

    # -- algebra -----------------------------------------------------------

    def __add__(self, other) -> DiffOperator:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self.terms)
        for k, v in other.terms.items():
            _accumulate(acc, k, v)
        return DiffOperator(self.chart, acc)

    __radd__ = __add__

    def __neg__(self) -> DiffOperator:
        return DiffOperator(self.chart, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> DiffOperator:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> DiffOperator:
        return (-self) + other

    def scale(self, c) -> DiffOperator:
        """Left multiplication by a scalar or function."""
        return DiffOperator(self.chart, {k: c * v for k, v in self.terms.items()})

    def compose(self, other: DiffOperator) -> DiffOperator:
        """``self o other``, expanded with the Leibniz rule."""
        acc: dict = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                for na in _below(a1):
                    for nb in _below(b1):
                        dc = c2.derivative(na, nb)
                        if not dc:
                            continue
                        k = _binom(a1, na) * _binom(b1, nb)
                        key = (_add(_sub(a1, na), a2), _add(_sub(b1, nb), b2))
                        _accumulate(acc, key, c1 * dc * k if k != 1 else c1 * dc)
        return DiffOperator(self.chart, acc)

    def __mul__(self, other) -> DiffOperator:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.compose(other)

    def __rmul__(self, other) -> DiffOperator:
        if isinstance(other, (int, Fraction, Expression)):
            return self.scale(other)
        return NotImplemented

    def commutator(self, other: DiffOperator) -> DiffOperator:
        return self.compose(other) - other.compose(self)

    def inverse(self) -> DiffOperator:
        if any(any(a) or any(b) for a, b in self.terms):
            raise NotInvertible("only zeroth-order operators are invertible here")
        z = (0,) * self.chart.m
        return DiffOperator.multiplication(self.coefficient(z, z).inverse())

    def apply(self, e: Expression) -> Expression:
        out = Expression.zero(self.chart)
        for (a, b), c in self.terms.items():
            out = out + c * e.derivative(a, b)
        return out

    __call__ = apply

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, Expression)):
            other = self._coerce(other)
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    __hash__ = None

    # -- printing ----------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0][0]) + sum(kv[0][1]), kv[0][1], kv[0][0]))

    def term_strings(self) -> list[str]:
        out = []
        for (a, b), c in self.sorted_terms():
            parts = [f"({c})"] + _fmt_derivs("dz", b) + _fmt_derivs("dzbar", a)
            out.append(" * ".join(parts))
        return out

    def __str__(self) -> str:
        return " + ".join(self.term_strings()) if self.terms else "0"

    def __repr__(self) -> str:
        return f"DiffOperator({self})"


class BiDiffOperator:
    """``C(f, g) = sum c[alpha, beta] (d_w^alpha f)(d_z^beta g)``.

    The first argument is differentiated antiholomorphically and the second
    holomorphically, which is the shape of every operator of a star product
    with separation of variables.
    """

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping[tuple[MultiIndex, MultiIndex], Expression] | None = None):
        self.chart = chart
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def zero(cls, chart: Chart) -> BiDiffOperator:
        return cls(chart)

    @classmethod
    def pointwise(cls, chart: Chart) -> BiDiffOperator:
        """The pointwise product ``(f, g) -> fg``."""
        z = (0,) * chart.m
        return cls(chart, {(z, z): Expression.one(chart)})

    @classmethod
    def from_bilinear(cls, e: Expression, first: int, second: int) -> BiDiffOperator:
        """Read the table off an expression bilinear in the generic functions ``first`` and ``second``.

        Raises ``ValueError`` if ``e`` is not of the separated bilinear shape.
        """
        chart = e.chart
        terms = {}
        for jets, coeff in e.jet_parts().items():
            if len(jets) != 2:
                raise ValueError(f"term with jets {jets} is not bilinear")
            by_fn = {j.fn: j for j in jets}
            if set(by_fn) != {first, second} or any(j.kind != 0 for j in jets):
                raise ValueError(f"term with jets {jets} does not involve f{first} and f{second}")
            jf, jg = by_fn[first], by_fn[second]
            if any(jf.beta) or any(jg.alpha):
                raise ValueError(f"term {jf}*{jg} violates separation of variables")
            terms[(jf.alpha, jg.beta)] = coeff
        return cls(chart, terms)

    @property
    def order(self) -> int:
        return max((sum(a) + sum(b) for a, b in self.terms), default=0)

    def apply(self, f: Expression, g: Expression) -> Expression:
        out = Expression.zero(self.chart)
        z = (0,) * self.chart.m
        for (a, b), c in self.terms.items():
            df = f.derivative(a, z)
            if not df:
                continue
            dg = g.derivative(z, b)
            if not dg:
                continue
            out = out + c * df * dg
        return out

    __call__ = apply

    def as_operator(self) -> DiffOperator:
        """``sum c[alpha, beta] d_z^beta d_w^alpha``: the Berezin-transform term with the same table."""
        return DiffOperator(self.chart, dict(self.terms))

    def __add__(self, other) -> BiDiffOperator:
        if isinstance(other, int) and other == 0:
            return self
        if not isinstance(other, BiDiffOperator):
            return NotImplemented
        acc = dict(self.terms)
        for k, v in other.terms.items():
            _accumulate(acc, k, v)
        return BiDiffOperator(self.chart, acc)

    __radd__ = __add__

    def __neg__(self) -> BiDiffOperator:
        return BiDiffOperator(self.chart, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> BiDiffOperator:
        return self + (-other)

    def __mul__(self, c) -> BiDiffOperator:
        if isinstance(c, (int, Fraction, Expression)):
            return BiDiffOperator(self.chart, {k: c * v for k, v in self.terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        if not isinstance(other, BiDiffOperator):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    __hash__ = None

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0][0]) + sum(kv[0][1]), kv[0][0], kv[0][1]))

    def term_strings(self) -> list[str]:
        out = []
        for (a, b), c in self.sorted_terms():
            left = "*".join(_fmt_derivs("dzbar", a)) or "1"
            right = "*".join(_fmt_derivs("dz", b)) or "1"
            out.append(f"({c}) * [{left}](f) * [{right}](g)")
        return out

    def __str__(self) -> str:
        return " + ".join(self.term_strings()) if self.terms else "0"

    def __repr__(self) -> str:
        return f"BiDiffOperator({self})"


OperatorSeries = FormalSeries  # FormalSeries[DiffOperator] with identity at nu^0


def identity_series(chart: Chart, valid_to: int) -> FormalSeries:
    return FormalSeries({0: DiffOperator.identity(chart)}, valid_to, DiffOperator.zero(chart))


def _check_unipotent(s: FormalSeries) -> None:
    if s.min_exp < 0 or not (s[0] == 1):
        raise ValueError("operator series must start with the identity operator")


def op_apply(d, e):
    """Apply an operator or operator series to an expression or expression series."""
    if isinstance(d, DiffOperator):
        if isinstance(e, FormalSeries):
            return e.map(d.apply, zero=Expression.zero(d.chart))
        return d.apply(e)
    if isinstance(e, Expression):
        e = FormalSeries({0: e}, d.valid_to, Expression.zero(e.chart))
    return d.cauchy(e, lambda op, x: op.apply(x), zero=e.zero)


def op_compose(d1: DiffOperator, d2: DiffOperator) -> DiffOperator:
    return d1.compose(d2)


def op_commutator(d1: DiffOperator, d2: DiffOperator) -> DiffOperator:
    return d1.commutator(d2)


def op_series_invert(s: FormalSeries) -> FormalSeries:
    _check_unipotent(s)
    return s.invert()


def op_series_log(s: FormalSeries) -> FormalSeries:
    _check_unipotent(s)
    return s.log()
