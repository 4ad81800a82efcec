"""Change of the formal parameter ``nu -> tau(nu)``.

``T`` substitutes ``tau`` for ``nu`` in every series. A product with table
``sum nu^r C_r`` is carried to ``sum tau(nu)^r C_r``, a product with
separation of variables for the metric ``g / tau_1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import Expression
from .errors import InvalidReparam, TheoremViolation
from .kahler import ddbar_series
from .operators import identity_series
from .series import FormalSeries, rational_series
from .star import (
    StarProduct,
    TraceData,
    berezin_transform,
    build_star,
    dual_potential,
    phase_potential,
)


@dataclass(frozen=True)
class Reparam:
    """``tau(nu) = tau_1 nu + tau_2 nu^2 + ...`` with finitely many rational coefficients."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coefficients or self.coefficients[0] == 0:
            raise InvalidReparam("tau_1 must be nonzero")

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[Fraction | int | str]) -> Reparam:
        return cls(tuple(Fraction(c) for c in coeffs))

    @property
    def tau1(self) -> Fraction:
        return self.coefficients[0]

    def series(self, valid_to: int) -> FormalSeries:
        """``tau`` as a series; exact, so any validity order is honest."""
        return rational_series({r: c for r, c in enumerate(self.coefficients, 1) if r <= valid_to},
                               max(valid_to, 1))

    def _tau_for(self, a: FormalSeries) -> FormalSeries:
        # negative powers of tau lose two orders through inversion
        return self.series(a.valid_to - min(a.min_exp, 0) + 3)

    def __call__(self, a: FormalSeries) -> FormalSeries:
        """``T a = a(tau(nu))``."""
        return a.substitute(self._tau_for(a))

    apply = __call__

    def compose(self, other: Reparam, valid_to: int) -> FormalSeries:
        """``self(other(nu))`` to ``valid_to``."""
        return self.series(valid_to).substitute(other.series(valid_to))

    def is_proper_involution(self, upto: int) -> bool:
        if self.tau1 != -1:
            return False
        nu = rational_series({1: 1}, upto)
        return self.compose(self, upto).agrees(nu, upto)

    def log_ratio(self, valid_to: int) -> FormalSeries:
        """``log(tau(nu) / (tau_1 nu))``, a rational series vanishing at 0."""
        ratio = self.series(valid_to + 1).shift(-1) * (1 / self.tau1)
        return ratio.log()

    def __str__(self) -> str:
        terms = [f"{c}*nu^{r}" for r, c in enumerate(self.coefficients, 1) if c]
        return " + ".join(terms)


def _const_series(chart, s: FormalSeries) -> FormalSeries:
    return FormalSeries({r: Expression.const(chart, c) for r, c in s.items()}, s.valid_to, Expression.zero(chart))


def transport_star(S: StarProduct, T: Reparam) -> StarProduct:
    """Table of ``*_T`` by substitution, carrying the potential ``T Phi`` and the metric ``g / tau_1``."""
    table = T(S.table())
    if not table[0] == S.c(0):
        raise TheoremViolation("transported table does not start with the pointwise product")
    potential = T(S.potential) if S.potential is not None else None
    return StarProduct(S.geometry.divided(T.tau1), potential, tuple(table[r] for r in range(1, table.valid_to + 1)))


@dataclass
class Comparison:
    name: str
    formula: FormalSeries
    rebuilt: FormalSeries
    order: int

    @property
    def equal(self) -> bool:
        return self.formula.agrees(self.rebuilt, self.order)


@dataclass
class TransportReport:
    """Transported objects computed by the substitution formulas and by rebuilding from ``T Phi``."""

    reparam: Reparam
    product: StarProduct
    rebuilt: StarProduct
    trace: TraceData
    comparisons: list[Comparison] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.equal for c in self.comparisons)

    def failures(self) -> list[str]:
        return [c.name for c in self.comparisons if not c.equal]


def transport_bundle(S: StarProduct, trace: TraceData, T: Reparam, strict: bool = True) -> TransportReport:
    """Compare ``C_T, I_T, T omega, T ~omega, T omega^ph, kappa_T, mu_T`` with the rebuilt pipeline."""
    chart = S.chart
    m = chart.m
    N = S.N
    top = trace.psi.valid_to
    moved = transport_star(S, T)
    rebuilt = build_star(S.geometry.divided(T.tau1), T(S.potential), N)
    rtrace = dual_potential(rebuilt)

    phi = S.potential.truncate(top)
    omega = ddbar_series(phi)
    omega_dual = ddbar_series(trace.psi)
    phase = ddbar_series(phase_potential(phi, trace.psi))
    kappa_formula = T(trace.kappa) - _const_series(chart, T.log_ratio(trace.kappa.valid_to)) * m

    rphi = rebuilt.potential.truncate(rtrace.psi.valid_to)
    comparisons = [
        Comparison("C_T", moved.table(), rebuilt.table(), N),
        Comparison("I_T", T(berezin_transform(S)), berezin_transform(rebuilt), N),
        Comparison("T omega", T(omega), ddbar_series(rphi), top),
        Comparison("T dual form", T(omega_dual), ddbar_series(rtrace.psi), top),
        Comparison("T phase form", T(phase), ddbar_series(phase_potential(rphi, rtrace.psi)), top),
        Comparison("kappa_T", kappa_formula, rtrace.kappa, top),
        Comparison("mu_T", T(trace.mu), rtrace.mu, min(trace.mu.valid_to, rtrace.mu.valid_to)),
    ]
    report = TransportReport(T, moved, rebuilt, rtrace, comparisons)
    if strict and not report.ok:
        raise TheoremViolation(f"transport formulas disagree with the rebuilt product: {', '.join(report.failures())}")
    return report


@dataclass
class InvolutionReport:
    """Findings for a proper involution; the three equivalent conditions are computed independently."""

    reparam: Reparam
    order: int
    conditions: dict[str, bool]
    checks: dict[str, bool]
    x_orders: dict[int, int]

    @property
    def consistent(self) -> bool:
        return len(set(self.conditions.values())) == 1

    @property
    def holds(self) -> bool:
        return self.consistent and all(self.conditions.values())

    @property
    def ok(self) -> bool:
        return self.consistent and all(self.checks.values())


def _series_zero(s: FormalSeries, upto: int) -> bool:
    return all(s[r] == 0 for r in range(min(s.min_exp, upto), upto + 1))


def involution_report(S: StarProduct, trace: TraceData, T: Reparam, N: int) -> InvolutionReport:
    """Evaluate the involution conditions to order ``N``; ``S`` must be known to ``N + 1``."""
    if not T.is_proper_involution(N):
        raise InvalidReparam(f"{T} is not a proper involution")
    chart = S.chart
    m = chart.m
    phi = S.potential.truncate(N)
    psi = trace.psi.truncate(N)
    phase = ddbar_series(phase_potential(phi, psi))
    omega = ddbar_series(phi)
    omega_dual = ddbar_series(psi)

    rebuilt = build_star(S.geometry.divided(T.tau1), T(S.potential), S.N)
    I = berezin_transform(S)
    composed = berezin_transform(rebuilt) * I
    conditions = {
        "T phase form = -phase form": _series_zero(T(phase) + phase, N),
        "T omega = dual form": _series_zero(T(omega) - omega_dual, N),
        "I_T I = 1": _series_zero(composed - identity_series(chart, composed.valid_to), N),
    }
    checks: dict[str, bool] = {"conditions agree": len(set(conditions.values())) == 1}
    x = I.log()
    x_orders = {r: x[r].order for r in range(1, N + 1) if x[r]}
    checks["order of X_r <= 2r"] = all(o <= 2 * r for r, o in x_orders.items())
    if all(conditions.values()):
        rtrace = dual_potential(rebuilt)
        checks["kappa_T = kappa"] = rtrace.kappa.agrees(trace.kappa, N)
        sign = (-1) ** m
        top = min(rtrace.mu.valid_to, trace.mu.valid_to, N)
        checks["mu_T = (-1)^m mu"] = rtrace.mu.agrees(trace.mu * sign, top)
        if all(c == 0 for c in T.coefficients[1:]):
            checks["kappa even"] = all(trace.kappa[r] == 0 for r in range(1, N + 1, 2))
            checks["X_2r = 0"] = all(not x[r] for r in range(2, N + 1, 2))
    return InvolutionReport(T, N, conditions, checks, x_orders)
