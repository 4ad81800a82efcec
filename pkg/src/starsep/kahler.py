"""Chart-level pseudo-Kaehler geometry.

A (1,1)-form ``i w_{kl} dz^k ^ dzbar^l`` is stored as its coefficient matrix
``w_{kl}`` only, so ``i d dbar p`` is the Hessian matrix ``d_{z^k} d_{w^l} p``.
The Ricci form is ``-i d dbar log g``, i.e. the matrix ``-d d_bar log g``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra import Chart, Expression
from .errors import DegenerateMetric, NotInvertible
from .operators import DiffOperator
from .series import FormalSeries


class Form11:
    __slots__ = ("chart", "entries")

    def __init__(self, chart: Chart, entries: Sequence[Sequence[Expression]]):
        m = chart.m
        if len(entries) != m or any(len(row) != m for row in entries):
            raise ValueError(f"a (1,1)-form on a chart of dimension {m} needs an {m}x{m} matrix")
        self.chart = chart
        self.entries = tuple(tuple(row) for row in entries)

    @classmethod
    def zero(cls, chart: Chart) -> Form11:
        z = Expression.zero(chart)
        return cls(chart, [[z] * chart.m for _ in range(chart.m)])

    def __getitem__(self, kl: tuple[int, int]) -> Expression:
        k, l = kl
        return self.entries[k][l]

    def _zip(self, other: Form11, op) -> Form11:
        return Form11(self.chart, [[op(a, b) for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def __add__(self, other) -> Form11:
        if isinstance(other, int) and other == 0:
            return self
        if not isinstance(other, Form11):
            return NotImplemented
        return self._zip(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other: Form11) -> Form11:
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self) -> Form11:
        return Form11(self.chart, [[-a for a in row] for row in self.entries])

    def __mul__(self, c) -> Form11:
        if isinstance(c, (int, Fraction, Expression)):
            return Form11(self.chart, [[a * c for a in row] for row in self.entries])
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return all(not a for row in self.entries for a in row)
        if not isinstance(other, Form11):
            return NotImplemented
        return self.chart == other.chart and self.entries == other.entries

    __hash__ = None

    def is_closed(self) -> bool:
        m = self.chart.m
        for k in range(m):
            for l in range(m):
                w = self.entries[k][l]
                for j in range(m):
                    if w.partial(j) != self.entries[j][l].partial(k):
                        return False
                    if w.partial(m + j) != self.entries[k][j].partial(m + l):
                        return False
        return True

    def has_logs(self) -> bool:
        return any(a.has_logs() for row in self.entries for a in row)

    def __str__(self) -> str:
        return "; ".join(f"[{k + 1},{l + 1}] {a}" for k, row in enumerate(self.entries) for l, a in enumerate(row))

    def __repr__(self) -> str:
        return f"Form11({self})"


def ddbar(p: Expression) -> Form11:
    """Coefficient matrix of ``i d dbar p``."""
    m = p.chart.m
    rows = []
    for k in range(m):
        dk = p.partial(k)
        rows.append([dk.partial(m + l) for l in range(m)])
    return Form11(p.chart, rows)


def ddbar_series(phi: FormalSeries) -> FormalSeries:
    """Order-wise ``i d dbar`` of a formal potential."""
    chart = phi.zero.chart
    return phi.map(ddbar, zero=Form11.zero(chart))


def form_arith(a: FormalSeries, b: FormalSeries | None, op: str, c=None) -> FormalSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "scale":
        return a * c
    raise ValueError(f"unknown form operation {op!r}")


def _det(rows: list[list[Expression]]) -> Expression:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = Expression.zero(rows[0][0].chart)
    for j in range(n):
        a = rows[0][j]
        if not a:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = a * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _inverse_matrix(rows: list[list[Expression]], det: Expression) -> list[list[Expression]]:
    n = len(rows)
    if n == 1:
        return [[det.inverse()]]
    inv_det = det.inverse()
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
            cof = _det(minor) if (i + j) % 2 == 0 else -_det(minor)
            inv[j][i] = cof * inv_det
    return inv


def log_constant(chart: Chart, c: Fraction | int) -> Expression:
    """``log c`` for a rational constant, as an opaque atom (``log 1 = 0``)."""
    return Expression.log(Fraction(c), chart=chart)


@dataclass(frozen=True, eq=False)
class ChartGeometry:
    """Metric data of ``omega_{-1} = i d dbar potential`` on one chart.

    ``ginv[l][k]`` is the Poisson tensor ``g^{l k}``: ``sum_l g[k][l] ginv[l][j] = delta``.
    ``logdet`` is the chosen representative of ``log det g``.
    """

    chart: Chart
    potential: Expression
    g: Form11
    ginv: tuple
    det: Expression
    logdet: Expression
    rho: Form11
    laplacian: DiffOperator

    def divided(self, tau1: Fraction | int) -> ChartGeometry:
        """Geometry of ``omega_{-1} / tau1`` with ``log det = log g - m log tau1``."""
        tau1 = Fraction(tau1)
        if tau1 == 0:
            raise DegenerateMetric("division of the metric by zero")
        m = self.chart.m
        c = 1 / tau1
        g = self.g * c
        ginv = tuple(tuple(a * tau1 for a in row) for row in self.ginv)
        logdet = self.logdet - log_constant(self.chart, tau1) * m
        return ChartGeometry(self.chart, self.potential * c, g, ginv, self.det * c ** m, logdet,
                             self.rho, self.laplacian * tau1)

    def contract(self, k: int, l: int) -> Expression:
        return self.ginv[l][k]


def chart_geometry(phi_minus1: Expression, logdet: Expression | None = None) -> ChartGeometry:
    """Metric, inverse, determinant, log-determinant, Ricci form and Laplacian of a potential."""
    chart = phi_minus1.chart
    m = chart.m
    g = ddbar(phi_minus1)
    rows = [list(r) for r in g.entries]
    det = _det(rows)
    if not det:
        raise DegenerateMetric("the metric determinant vanishes identically")
    try:
        ginv_t = _inverse_matrix(rows, det)
    except NotInvertible as exc:
        raise DegenerateMetric("metric entries must be rational functions") from exc
    ginv = tuple(tuple(row) for row in ginv_t)
    if logdet is None:
        logdet = Expression.log(det)
    rho = -ddbar(logdet)
    lap = DiffOperator.zero(chart)
    for k in range(m):
        for l in range(m):
            c = ginv[l][k]
            if c:
                lap = lap + DiffOperator.monomial(chart, _unit(m, l), _unit(m, k), c)
    return ChartGeometry(chart, phi_minus1, g, ginv, det, logdet, rho, lap)


def _unit(m: int, k: int) -> tuple[int, ...]:
    return tuple(int(i == k) for i in range(m))
