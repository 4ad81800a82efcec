"""Numeric chart integrals for the trace property of the density ``mu``."""

from __future__ import annotations

import cmath
import math
import warnings

from scipy import integrate

from .algebra import Expression
from .series import FormalSeries
from .star import StarProduct, TraceData, star_multiply


def chart_integral(e: Expression, radius: float = math.inf, tol: float = 1e-9) -> complex:
    """``int_C e(z, conj z) dA`` on a one-dimensional chart, in polar coordinates.

    The angle is integrated first, so integrands that vanish only through
    angular cancellation stay finite when ``radius`` is infinite.
    """
    if e.chart.m != 1:
        raise NotImplementedError("chart integrals are implemented for m = 1")
    if not e:
        return 0j

    def peak(r: float) -> float:
        return max(abs(e.evaluate({"z1": cmath.rect(r, 2 * math.pi * k / 16)})) for k in range(16)) * r

    def angular(r: float, part) -> float:
        def f(theta: float) -> float:
            return part(e.evaluate({"z1": cmath.rect(r, theta)})) * r
        # below the roundoff floor more accuracy only subdivides noise
        return integrate.quad(f, 0.0, 2 * math.pi, epsabs=max(tol, 1e-13 * peak(r)), epsrel=tol, limit=100)[0]

    if math.isfinite(radius):
        samples = [radius * (k + 1) / 8 for k in range(8)]
        outer_floor = max(tol, 1e-13 * radius * 2 * math.pi * max(peak(r) for r in samples))
    else:
        outer_floor = tol
    with warnings.catch_warnings():
        # integrands that vanish exactly only reach the roundoff floor
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        try:
            re = integrate.quad(lambda r: angular(r, lambda v: v.real), 0.0, radius,
                                epsabs=outer_floor, epsrel=tol, limit=100)[0]
            im = integrate.quad(lambda r: angular(r, lambda v: v.imag), 0.0, radius,
                                epsabs=outer_floor, epsrel=tol, limit=100)[0]
        except OverflowError:
            raise ArithmeticError("integrand overflows far out on the chart; "
                                  "it does not decay, so integrate over a disc") from None
    return complex(re, im)


def commutator_density(S: StarProduct, trace: TraceData, f: Expression, g: Expression) -> FormalSeries:
    """``(f * g - g * f) mu`` as a series of densities."""
    comm = star_multiply(S, f, g) - star_multiply(S, g, f)
    return comm * trace.mu


def trace_defects(S: StarProduct, trace: TraceData, f: Expression, g: Expression,
                  orders: range, radius: float = math.inf) -> dict[int, complex]:
    """Chart integral of each requested coefficient of ``(f * g - g * f) mu``."""
    density = commutator_density(S, trace, f, g)
    return {r: chart_integral(density[r], radius) for r in orders}
