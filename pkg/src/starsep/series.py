"""Truncated formal Laurent series in the deformation parameter ``nu``.

A :class:`FormalSeries` knows its coefficients exactly up to ``valid_to`` and
nothing above it: asking for a higher coefficient raises
:class:`~starsep.errors.UnknownCoefficient` instead of returning zero. Every
operation computes the validity order of its result.

Coefficients may be any ring elements supporting ``+``, ``-``, ``*``,
multiplication by ``Fraction`` and comparison with ``0``; ``zero + 1`` must be
the unit where :meth:`exp`, :meth:`log` or :meth:`invert` are used. The
product of coefficients is taken in order, so non-commutative coefficient
rings (differential operators) are fine.
"""

from __future__ import annotations

import math
import operator
from fractions import Fraction
from typing import Any, Callable, Generic, Iterator, Mapping, TypeVar

from .errors import InvalidReparam, NotInvertible, SeriesDomainError, UnknownCoefficient

C = TypeVar("C")


def _inverse(c):
    if isinstance(c, (int, Fraction)):
        if c == 0:
            raise NotInvertible("zero leading coefficient")
        return Fraction(1) / c
    try:
        return c.inverse()
    except (AttributeError, ArithmeticError, ValueError) as exc:
        raise NotInvertible(f"leading coefficient {c} is not invertible") from exc


class FormalSeries(Generic[C]):
    """``sum_r nu^r c_r`` with a finite principal part, known up to ``valid_to``."""

    __slots__ = ("_coeffs", "valid_to", "zero")

    def __init__(self, coeffs: Mapping[int, C], valid_to: int, zero: C):
        clean = {}
        for r, c in coeffs.items():
            if r > valid_to:
                raise ValueError(f"coefficient at nu^{r} lies above the validity order {valid_to}")
            if not c == 0:
                clean[r] = c
        self._coeffs = dict(sorted(clean.items()))
        self.valid_to = valid_to
        self.zero = zero

    # -- constructors ------------------------------------------------------

    @classmethod
    def monomial(cls, c: C, r: int, valid_to: int, zero: C) -> FormalSeries[C]:
        return cls({r: c} if r <= valid_to else {}, valid_to, zero)

    @classmethod
    def from_list(cls, coeffs, start: int, zero: C, valid_to: int | None = None) -> FormalSeries[C]:
        """Coefficients ``coeffs[i]`` at ``nu^(start + i)``; valid to the last given one by default."""
        coeffs = list(coeffs)
        if valid_to is None:
            valid_to = start + len(coeffs) - 1
        return cls({start + i: c for i, c in enumerate(coeffs) if start + i <= valid_to}, valid_to, zero)

    def _like(self, coeffs: Mapping[int, Any], valid_to: int, zero=None) -> FormalSeries:
        return FormalSeries(coeffs, valid_to, self.zero if zero is None else zero)

    # -- access ------------------------------------------------------------

    def __getitem__(self, r: int) -> C:
        if r > self.valid_to:
            raise UnknownCoefficient(f"coefficient at nu^{r} is unknown (valid to nu^{self.valid_to})")
        return self._coeffs.get(r, self.zero)

    coeff = __getitem__

    @property
    def min_exp(self) -> int:
        """Lowest exponent with a nonzero coefficient; ``valid_to + 1`` if none is known."""
        return next(iter(self._coeffs), self.valid_to + 1)

    def items(self) -> Iterator[tuple[int, C]]:
        return iter(self._coeffs.items())

    def vanishes_at_zero(self) -> bool:
        return self.min_exp >= 1

    def is_zero(self) -> bool:
        return not self._coeffs

    def exponents(self, start: int | None = None) -> range:
        lo = self.min_exp if start is None else start
        return range(lo, self.valid_to + 1)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: FormalSeries) -> FormalSeries:
        if not isinstance(other, FormalSeries):
            return NotImplemented
        top = min(self.valid_to, other.valid_to)
        acc: dict = {}
        for src in (self._coeffs, other._coeffs):
            for r, c in src.items():
                if r <= top:
                    acc[r] = acc[r] + c if r in acc else c
        return self._like(acc, top)

    def __neg__(self) -> FormalSeries:
        return self._like({r: -c for r, c in self._coeffs.items()}, self.valid_to)

    def __sub__(self, other: FormalSeries) -> FormalSeries:
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return self + (-other)

    def cauchy(self, other: FormalSeries, op: Callable[[Any, Any], Any], zero=None) -> FormalSeries:
        """Cauchy product with coefficient product ``op(a_i, b_j)``.

        With lowest exponents ``p, q`` and validity orders ``M, N`` the result is
        valid to ``min(M + q, N + p)``.
        """
        p, q = self.min_exp, other.min_exp
        top = min(self.valid_to + q, other.valid_to + p)
        acc: dict = {}
        for i, a in self._coeffs.items():
            if i + q > top:
                break
            for j, b in other._coeffs.items():
                if i + j > top:
                    break
                v = op(a, b)
                acc[i + j] = acc[i + j] + v if (i + j) in acc else v
        return FormalSeries(acc, top, self.zero if zero is None else zero)

    def __mul__(self, other) -> FormalSeries:
        if isinstance(other, FormalSeries):
            return self.cauchy(other, operator.mul)
        return self._like({r: c * other for r, c in self._coeffs.items()}, self.valid_to)

    def __rmul__(self, other) -> FormalSeries:
        return self._like({r: other * c for r, c in self._coeffs.items()}, self.valid_to)

    def map(self, fn: Callable[[C], Any], zero=None) -> FormalSeries:
        """Apply ``fn`` to every coefficient (``nu``-linear extension of ``fn``)."""
        new_zero = fn(self.zero) if zero is None else zero
        return FormalSeries({r: fn(c) for r, c in self._coeffs.items()}, self.valid_to, new_zero)

    def shift(self, k: int) -> FormalSeries:
        """Multiply by ``nu^k``."""
        return self._like({r + k: c for r, c in self._coeffs.items()}, self.valid_to + k)

    def truncate(self, n: int) -> FormalSeries:
        if n > self.valid_to:
            raise UnknownCoefficient(f"cannot truncate to nu^{n}: valid to nu^{self.valid_to}")
        return self._like({r: c for r, c in self._coeffs.items() if r <= n}, n)

    def one(self):
        return self.zero + 1

    def invert(self) -> FormalSeries:
        """Two-sided inverse; requires an invertible leading coefficient."""
        p = self.min_exp
        if p > self.valid_to:
            raise NotInvertible("series has no known nonzero coefficient")
        lead_inv = _inverse(self._coeffs[p])
        n_max = self.valid_to - p
        b = [lead_inv]
        for n in range(1, n_max + 1):
            s = None
            for k in range(1, n + 1):
                a = self._coeffs.get(p + k)
                if a is None:
                    continue
                t = a * b[n - k]
                s = t if s is None else s + t
            b.append(self.zero if s is None else -(lead_inv * s))
        return self._like({-p + n: c for n, c in enumerate(b)}, -p + n_max)

    def __pow__(self, k: int) -> FormalSeries:
        if k < 0:
            return self.invert() ** (-k)
        if k == 0:
            return self._like({0: self.one()}, self.valid_to - self.min_exp)
        result = self
        for _ in range(k - 1):
            result = result * self
        return result

    def exp(self) -> FormalSeries:
        if not self.vanishes_at_zero():
            raise SeriesDomainError("exp needs a series vanishing at nu = 0")
        top = self.valid_to
        result = self._like({0: self.one()}, top)
        power = None
        for k in range(1, top + 1):
            power = self if power is None else (power * self).truncate(top)
            result = result + power * Fraction(1, math.factorial(k))
        return result

    def log(self) -> FormalSeries:
        if self.min_exp != 0 or not (self._coeffs[0] == self.one()):
            raise SeriesDomainError("log needs a series with leading term 1 * nu^0")
        top = self.valid_to
        b = self - self._like({0: self.one()}, top)
        result = self._like({}, top)
        power = None
        for k in range(1, top + 1):
            power = b if power is None else (power * b).truncate(top)
            result = result + power * Fraction((-1) ** (k + 1), k)
        return result

    def ddnu(self) -> FormalSeries:
        return self._like({r - 1: c * r for r, c in self._coeffs.items() if r != 0}, self.valid_to - 1)

    def substitute(self, tau: FormalSeries) -> FormalSeries:
        """``a(tau(nu))`` for a rational series ``tau = tau_1 nu + ...`` with ``tau_1 != 0``."""
        if tau.min_exp < 1 or tau.valid_to < 1:
            raise InvalidReparam("tau must have the form tau_1 nu + tau_2 nu^2 + ...")
        if tau.min_exp != 1:
            raise InvalidReparam("tau_1 must be nonzero")
        p = self.min_exp
        top = self.valid_to
        if p > top:
            return self._like({}, top)
        powers: dict[int, FormalSeries] = {}
        cur = None
        for r in range(1, top + 1):
            cur = tau if cur is None else cur * tau
            powers[r] = cur
        if p < 0:
            inv = tau.invert()
            cur = None
            for r in range(-1, p - 1, -1):
                cur = inv if cur is None else cur * inv
                powers[r] = cur
        for r in self._coeffs:
            if r != 0:
                top = min(top, powers[r].valid_to)
        acc: dict = {}
        for r, c in self._coeffs.items():
            if r == 0:
                acc[0] = acc[0] + c if 0 in acc else c
                continue
            for n, t in powers[r].items():
                if n > top:
                    break
                v = c * t
                acc[n] = acc[n] + v if n in acc else v
        return self._like({n: c for n, c in acc.items() if n <= top}, top)

    # -- comparison and printing --------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return self.valid_to == other.valid_to and self._coeffs == other._coeffs

    def agrees(self, other: FormalSeries, upto: int | None = None) -> bool:
        """Coefficient-wise equality up to ``upto`` (default: the common validity order)."""
        top = min(self.valid_to, other.valid_to) if upto is None else upto
        lo = min(self.min_exp, other.min_exp)
        return all(self[r] == other[r] for r in range(lo, top + 1))

    def lines(self, fmt: Callable[[C], str] = str, start: int | None = None) -> list[str]:
        lo = min(self.min_exp, self.valid_to) if start is None else start
        return [f"nu^{r} : {fmt(self[r])}" for r in range(lo, self.valid_to + 1)]

    def __str__(self) -> str:
        return "\n".join(self.lines())

    def __repr__(self) -> str:
        return f"FormalSeries({dict(self._coeffs)!r}, valid_to={self.valid_to})"


def series_constant(c, valid_to: int, zero) -> FormalSeries:
    return FormalSeries({0: c}, valid_to, zero)


def rational_series(coeffs: Mapping[int, Fraction | int], valid_to: int) -> FormalSeries[Fraction]:
    return FormalSeries({r: Fraction(c) for r, c in coeffs.items()}, valid_to, Fraction(0))


def series_arith(a: FormalSeries, b: FormalSeries, op: str) -> FormalSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown series operation {op!r}")


def series_invert(a: FormalSeries) -> FormalSeries:
    return a.invert()


def series_exp(a: FormalSeries) -> FormalSeries:
    return a.exp()


def series_log(a: FormalSeries) -> FormalSeries:
    return a.log()


def series_ddnu(a: FormalSeries) -> FormalSeries:
    return a.ddnu()


def series_substitute(a: FormalSeries, tau: FormalSeries) -> FormalSeries:
    return a.substitute(tau)
