"""Star products with separation of variables on a chart.

The product with classifying potential ``Phi = Phi_{-1}/nu + Phi_0 + nu Phi_1 + ...``
is built from the left multiplication operator ``L_f = f + nu A_1 + nu^2 A_2 + ...``
of a generic function ``f``. ``L_f`` contains only holomorphic derivatives,
annihilates constants beyond ``f`` itself and commutes with every
``R_l = dPhi/dw^l + d/dw^l``. Collecting the ``nu^(r-1)`` part of
``[L_f, R_l] = 0`` gives

    [A_r, dPhi_{-1}/dw^l] = -[A_{r-1}, dPhi_0/dw^l + d/dw^l] - sum_{s=1}^{r-2} [A_{r-1-s}, dPhi_s/dw^l]

which is solved for ``A_r`` from the top derivative order down. ``C_r(f, g) = A_r g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import Chart, Expression
from .errors import ConstructionError, DegenerateMetric, InsufficientData
from .kahler import ChartGeometry, Form11, ddbar, ddbar_series
from .operators import (
    BiDiffOperator,
    DiffOperator,
    _add,
    _binom,
    _sub,
    multi_indices,
    op_apply,
)
from .series import FormalSeries

GENERIC_FN = 0  # jet family reserved for the generic function inside the construction


def _unit(m: int, k: int) -> tuple[int, ...]:
    return tuple(int(i == k) for i in range(m))


def expression_series(e: Expression | FormalSeries, valid_to: int) -> FormalSeries:
    """Promote an expression to a ``nu``-constant series (exact, given validity ``valid_to``)."""
    if isinstance(e, FormalSeries):
        return e
    return FormalSeries({0: e}, valid_to, Expression.zero(e.chart))


def holomorphic_commutator(a: DiffOperator, h: Expression) -> DiffOperator:
    """``[A, h]`` for a holomorphic operator ``A`` and a function ``h``."""
    chart = a.chart
    zero = (0,) * chart.m
    acc: dict = {}
    for (alpha, beta), c in a.terms.items():
        for delta in _nonzero_below(beta):
            dh = h.derivative(zero, delta)
            if not dh:
                continue
            key = (alpha, _sub(beta, delta))
            v = c * dh * _binom(beta, delta)
            acc[key] = acc[key] + v if key in acc else v
    return DiffOperator(chart, acc)


def _nonzero_below(beta):
    import itertools

    for d in itertools.product(*(range(k + 1) for k in beta)):
        if any(d):
            yield d


def antiholomorphic_shift_commutator(a: DiffOperator, l: int) -> DiffOperator:
    """``[A, d/dw^l]`` for a holomorphic operator ``A``: ``-sum (d_{w^l} a_beta) d^beta``."""
    m = a.chart.m
    return DiffOperator(a.chart, {k: -c.partial(m + l) for k, c in a.terms.items()})


class StarBuilder:
    """Order-by-order construction of ``L_f``; can be resumed as more potential orders become known."""

    def __init__(self, geometry: ChartGeometry):
        self.geometry = geometry
        self.chart = geometry.chart
        self.f = Expression.jet(self.chart, GENERIC_FN)
        self.A: list[DiffOperator] = [DiffOperator.multiplication(self.f)]
        self.C: list[BiDiffOperator] = []
        self.potential: FormalSeries | None = None
        self._used: dict[int, Expression] = {}
        self._h: dict[tuple[int, int], Expression] = {}
        self.row_checks = 0

    @property
    def order(self) -> int:
        return len(self.C)

    def _grad(self, s: int, l: int) -> Expression:
        key = (s, l)
        if key not in self._h:
            phi_s = self.potential[s]
            prev = self._used.get(s)
            if prev is not None and prev != phi_s:
                raise ConstructionError(f"potential order {s} changed after it was used")
            self._used[s] = phi_s
            self._h[key] = phi_s.partial(self.chart.m + l)
        return self._h[key]

    def extend(self, potential: FormalSeries, n: int) -> None:
        """Compute ``C_r`` for ``r <= n``; ``potential`` must be valid to ``n - 2``."""
        if potential.valid_to < n - 2:
            raise InsufficientData(f"building to order {n} needs the potential to order {n - 2}, "
                                   f"have {potential.valid_to}")
        if potential.min_exp < -1:
            raise ValueError("the potential must start at nu^-1")
        if self.potential is None:
            if ddbar(potential[-1]) != self.geometry.g:
                raise ValueError("the leading potential does not produce the chart metric")
        self.potential = potential
        for s, e in self._used.items():
            if potential[s] != e:
                raise ConstructionError(f"potential order {s} changed after it was used")
        while self.order < n:
            self._step(self.order + 1)

    def _step(self, r: int) -> None:
        chart = self.chart
        m = chart.m
        A = self.A
        rhs_ops = []
        for l in range(m):
            acc = antiholomorphic_shift_commutator(A[r - 1], l)
            if r >= 2:
                acc = acc + holomorphic_commutator(A[r - 1], self._grad(0, l))
                for s in range(1, r - 1):
                    acc = acc + holomorphic_commutator(A[r - 1 - s], self._grad(s, l))
            rhs_ops.append(-acc)
        a_r = self._solve(rhs_ops)
        for l in range(m):
            if holomorphic_commutator(a_r, self._grad(-1, l)) != rhs_ops[l]:
                raise ConstructionError(f"order {r}: residual of the commutation condition is nonzero (l = {l + 1})")
        A.append(a_r)
        self.C.append(self._table(a_r, r))

    def _solve(self, rhs_ops: list[DiffOperator]) -> DiffOperator:
        chart = self.chart
        m = chart.m
        zero = (0,) * m
        ginv = self.geometry.ginv
        for op in rhs_ops:
            if not op.is_holomorphic():
                raise ConstructionError("right-hand side contains antiholomorphic derivatives")
        top = max((op.order for op in rhs_ops), default=0)
        if all(not op for op in rhs_ops):
            return DiffOperator.zero(chart)
        h = [self._grad(-1, l) for l in range(m)]
        a: dict[tuple, Expression] = {}
        determined: set[tuple] = set()
        for j in range(top, -1, -1):
            for gamma in multi_indices(m, j):
                rhs = []
                for l in range(m):
                    v = rhs_ops[l].coefficient(zero, gamma)
                    for beta, ab in a.items():
                        delta = _sub(beta, gamma)
                        if min(delta) < 0 or sum(delta) < 2:
                            continue
                        dh = h[l].derivative(zero, delta)
                        if dh:
                            v = v - ab * dh * _binom(beta, delta)
                    rhs.append(v)
                for k in range(m):
                    x = Expression.zero(chart)
                    for l in range(m):
                        if rhs[l] and ginv[l][k]:
                            x = x + rhs[l] * ginv[l][k]
                    x = x * Fraction(1, gamma[k] + 1)
                    delta = _add(gamma, _unit(m, k))
                    if delta in determined:
                        self.row_checks += 1
                        if a.get(delta, Expression.zero(chart)) != x:
                            raise ConstructionError(f"overdetermined rows disagree at multi-index {delta}")
                    else:
                        determined.add(delta)
                        if x:
                            a[delta] = x
        return DiffOperator(chart, {(zero, beta): c for beta, c in a.items()})

    def _table(self, a_r: DiffOperator, r: int) -> BiDiffOperator:
        terms = {}
        for (alpha, beta), c in a_r.terms.items():
            for jets, coeff in c.jet_parts().items():
                if len(jets) != 1 or jets[0].fn != GENERIC_FN or jets[0].kind != 0:
                    raise ConstructionError(f"C_{r}: coefficient is not linear in the generic function")
                jet = jets[0]
                if any(jet.beta):
                    raise ConstructionError(f"C_{r}: first argument differentiated holomorphically")
                terms[(jet.alpha, beta)] = coeff
        return BiDiffOperator(self.chart, terms)

    def product(self) -> StarProduct:
        return StarProduct(self.geometry, self.potential, tuple(self.C), row_checks=self.row_checks)


@dataclass(frozen=True, eq=False)
class StarProduct:
    """``f * g = fg + sum_{r=1}^N nu^r C_r(f, g)`` on one chart."""

    geometry: ChartGeometry
    potential: FormalSeries | None
    C: tuple[BiDiffOperator, ...]
    row_checks: int = field(default=0, compare=False)

    @property
    def chart(self) -> Chart:
        return self.geometry.chart

    @property
    def N(self) -> int:
        return len(self.C)

    def c(self, r: int) -> BiDiffOperator:
        if r == 0:
            return BiDiffOperator.pointwise(self.chart)
        return self.C[r - 1]

    def table(self) -> FormalSeries:
        """The formal bidifferential operator ``sum nu^r C_r`` with ``C_0`` the pointwise product."""
        coeffs = {r: self.c(r) for r in range(self.N + 1)}
        return FormalSeries(coeffs, self.N, BiDiffOperator.zero(self.chart))

    def multiply(self, f, g) -> FormalSeries:
        return star_multiply(self, f, g)

    def truncated(self, n: int) -> StarProduct:
        if n > self.N:
            raise InsufficientData(f"product known to order {self.N}, asked for {n}")
        return StarProduct(self.geometry, self.potential, self.C[:n], self.row_checks)


def build_star(geometry: ChartGeometry, potential: FormalSeries, N: int) -> StarProduct:
    """Star product with separation of variables with formal potential ``potential`` to order ``N``."""
    if N < 0:
        raise ValueError("order must be nonnegative")
    builder = StarBuilder(geometry)
    builder.extend(potential, N)
    return builder.product()


def star_multiply(S: StarProduct, f, g) -> FormalSeries:
    """``f * g`` for expressions or expression series."""
    f = expression_series(f, S.N)
    g = expression_series(g, S.N)
    p, q = f.min_exp, g.min_exp
    top = min(f.valid_to + q, g.valid_to + p, S.N + p + q)
    acc: dict[int, Expression] = {}
    for i, fi in f.items():
        for j, gj in g.items():
            for r in range(0, top - i - j + 1):
                v = fi * gj if r == 0 else S.C[r - 1].apply(fi, gj)
                n = i + j + r
                acc[n] = acc[n] + v if n in acc else v
    return FormalSeries(acc, top, Expression.zero(S.chart))


def berezin_transform(S: StarProduct) -> FormalSeries:
    """``I = 1 + nu I_1 + ...`` with ``I(ab) = b * a``; ``I_r`` carries the table of ``C_r``."""
    coeffs = {0: DiffOperator.identity(S.chart)}
    for r in range(1, S.N + 1):
        coeffs[r] = S.C[r - 1].as_operator()
    return FormalSeries(coeffs, S.N, DiffOperator.zero(S.chart))


def dual_star(S: StarProduct) -> StarProduct:
    """Table of ``f ~* g = I^{-1}(Ig * If)``; a product for the metric ``-g``."""
    chart = S.chart
    I = berezin_transform(S)
    I_inv = I.invert()
    f = Expression.function(chart, 1)
    g = Expression.function(chart, 2)
    prod = star_multiply(S, op_apply(I, g), op_apply(I, f))
    result = op_apply(I_inv, prod)
    if result[0] != f * g:
        raise ConstructionError("dual product does not deform the pointwise product")
    tables = []
    for r in range(1, result.valid_to + 1):
        try:
            tables.append(BiDiffOperator.from_bilinear(result[r], 1, 2))
        except ValueError as exc:
            raise ConstructionError(f"dual C_{r}: {exc}") from exc
    return StarProduct(S.geometry.divided(-1), None, tuple(tables))


@dataclass(frozen=True, eq=False)
class TraceData:
    """Dual potential ``psi``, the function ``kappa`` and the trace density scalar ``mu``.

    ``mu`` is the density of ``(1/m!)(omega_{-1}/nu)^m e^kappa`` against the
    coordinate volume element normalized so that ``omega_{-1}^m / m!`` has density
    ``det g``; i.e. ``mu = nu^{-m} det g e^kappa``.
    """

    psi: FormalSeries
    kappa: FormalSeries
    mu: FormalSeries


def dual_potential(S: StarProduct) -> TraceData:
    """Dual potential, ``kappa`` and trace density of a product with known potential.

    ``Psi_r`` uses ``~I_{r+1}``, so the result is valid one order below ``S``.
    """
    if S.potential is None:
        raise InsufficientData("the product carries no classifying potential")
    phi = S.potential
    geom = S.geometry
    chart = S.chart
    zero = Expression.zero(chart)
    top = min(S.N - 1, phi.valid_to)
    if top < 0:
        raise InsufficientData("need the product to order >= 1 for the dual potential")
    I_inv = berezin_transform(S).invert()
    psi = {-1: -phi[-1], 0: -phi[0] + geom.logdet}
    for r in range(1, top + 1):
        acc = zero
        for k in range(1, r + 2):
            if k == r:
                continue
            term = I_inv[k].apply(phi[r - k])
            if term:
                acc = acc + term * (r - k)
        psi[r] = -phi[r] - acc * Fraction(1, r)
    psi_s = FormalSeries(psi, top, zero)
    kappa = phi.truncate(top) + psi_s - FormalSeries({0: geom.logdet}, top, zero)
    for r, c in kappa.items():
        if c.has_logs():
            raise ConstructionError(f"kappa has a log atom at order {r}")
    if not kappa.vanishes_at_zero():
        raise ConstructionError("kappa does not vanish at nu = 0")
    mu = (kappa.exp() * geom.det).shift(-chart.m)
    return TraceData(psi_s, kappa, mu)


def phase_form(omega: FormalSeries, omega_dual: FormalSeries) -> FormalSeries:
    return (omega - omega_dual) * Fraction(1, 2)


def phase_potential(phi: FormalSeries, psi: FormalSeries) -> FormalSeries:
    """A potential of the phase form: ``(Phi - Psi) / 2``."""
    return (phi - psi) * Fraction(1, 2)


def classifying_from_phase(geometry: ChartGeometry, phase: FormalSeries, N: int) -> FormalSeries:
    """Potential of the unique classifying form whose phase form has potential ``phase``.

    ``Phi_0 = Phi^ph_0 + (1/2) log g`` and for ``r >= 1``
    ``Phi_r = Phi^ph_r - (1/2r) sum_{k=1}^{r+1} (r-k) ~I_k Phi_{r-k}``, where
    ``~I_k`` only involves ``Phi_{-1..r-1}``.
    """
    if phase.valid_to < N:
        raise InsufficientData(f"phase potential known to order {phase.valid_to}, need {N}")
    if phase.min_exp < -1:
        raise ValueError("the phase potential must start at nu^-1")
    if ddbar(phase[-1]) != geometry.g:
        raise DegenerateMetric("leading phase potential does not produce the chart metric")
    chart = geometry.chart
    zero = Expression.zero(chart)
    phi = {-1: phase[-1], 0: phase[0] + geometry.logdet * Fraction(1, 2)}
    builder = StarBuilder(geometry)
    for r in range(1, N + 1):
        known = FormalSeries(phi, r - 1, zero)
        builder.extend(known, r + 1)
        I_inv = berezin_transform(builder.product()).invert()
        acc = zero
        for k in range(1, r + 2):
            if k == r:
                continue
            term = I_inv[k].apply(phi[r - k])
            if term:
                acc = acc + term * (r - k)
        phi[r] = phase[r] - acc * Fraction(1, 2 * r)
    return FormalSeries(phi, N, zero)


def classifying_form(potential: FormalSeries) -> FormalSeries:
    return ddbar_series(potential)


# -- checks used by tests, the acceptance suite and the CLI -------------------


def associator(S: StarProduct, f: Expression, g: Expression, h: Expression) -> FormalSeries:
    return star_multiply(S, star_multiply(S, f, g), h) - star_multiply(S, f, star_multiply(S, g, h))


def generic_associator(S: StarProduct) -> FormalSeries:
    chart = S.chart
    f, g, h = (Expression.function(chart, i) for i in (1, 2, 3))
    return associator(S, f, g, h)


def separation_defects(S: StarProduct) -> list[str]:
    chart = S.chart
    a = Expression.holomorphic_function(chart, 1)
    b = Expression.antiholomorphic_function(chart, 2)
    f = Expression.function(chart, 3)
    out = []
    if star_multiply(S, a, f) != expression_series(a * f, S.N):
        out.append("a * f != af")
    if star_multiply(S, f, b) != expression_series(b * f, S.N):
        out.append("f * b != bf")
    return out


def unit_defects(S: StarProduct) -> list[int]:
    chart = S.chart
    one = Expression.one(chart)
    f = Expression.function(chart, 1)
    return [r for r in range(1, S.N + 1) if S.C[r - 1].apply(one, f) or S.C[r - 1].apply(f, one)]


def c1_expected(geometry: ChartGeometry) -> BiDiffOperator:
    """``C_1(f, g) = g^{lk} (d_{w^l} f)(d_{z^k} g)``."""
    m = geometry.chart.m
    terms = {}
    for k in range(m):
        for l in range(m):
            if geometry.ginv[l][k]:
                terms[(_unit(m, l), _unit(m, k))] = geometry.ginv[l][k]
    return BiDiffOperator(geometry.chart, terms)


def berezin_defects(S: StarProduct) -> list[int]:
    """Orders where ``I(ab) != b * a`` for generic holomorphic ``a`` and antiholomorphic ``b``."""
    chart = S.chart
    a = Expression.holomorphic_function(chart, 1)
    b = Expression.antiholomorphic_function(chart, 2)
    lhs = op_apply(berezin_transform(S), a * b)
    rhs = star_multiply(S, b, a)
    return [r for r in range(0, S.N + 1) if lhs[r] != rhs[r]]


def omega_identity_residual(S: StarProduct, trace: TraceData) -> FormalSeries:
    """``omega + ~omega + rho - i d dbar kappa`` order by order."""
    top = trace.psi.valid_to
    omega = ddbar_series(S.potential.truncate(top))
    omega_dual = ddbar_series(trace.psi)
    rho = FormalSeries({0: S.geometry.rho}, top, Form11.zero(S.chart))
    return omega + omega_dual + rho - ddbar_series(trace.kappa)


def dnu_residual(S: StarProduct, trace: TraceData) -> FormalSeries:
    """``dPhi/dnu + I dPsi/dnu - m/nu``."""
    chart = S.chart
    top = trace.psi.valid_to
    I = berezin_transform(S)
    lhs = S.potential.truncate(top).ddnu() + op_apply(I, trace.psi.ddnu())
    return lhs - FormalSeries({-1: Expression.const(chart, chart.m)}, top - 1, Expression.zero(chart))
