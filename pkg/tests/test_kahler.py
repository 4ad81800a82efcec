from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starsep import Chart, DiffOperator, Expression, Form11, FormalSeries, chart_geometry, ddbar, op_apply, parse_expression
from starsep.errors import DegenerateMetric
from starsep.kahler import form_arith

C1 = Chart(1)
C2 = Chart(2)


def P(text, chart=C1):
    return parse_expression(text, chart)


def form(rows, chart=C1):
    return Form11(chart, [[P(t, chart) for t in row] for row in rows])


def test_ddbar_examples():
    assert ddbar(P("z1*w1")) == form([["1"]])
    assert ddbar(P("log(1+z1*w1)")) == form([["1/(1+z1*w1)^2"]])
    assert ddbar(P("z1^3")) == form([["0"]])


def test_flat_geometry():
    geo = chart_geometry(P("z1*w1"))
    assert geo.g == form([["1"]])
    assert geo.det == 1
    assert geo.rho == form([["0"]])
    assert geo.laplacian == DiffOperator.monomial(C1, (1,), (1,))


def test_fubini_study_ricci_form():
    geo = chart_geometry(P("log(1+z1*w1)"))
    assert geo.rho == form([["2/(1+z1*w1)^2"]])
    assert geo.logdet == P("-2*log(1+z1*w1)")


def test_pseudo_kaehler_chart():
    geo = chart_geometry(P("z1*w1 - z2*w2", C2))
    assert geo.g == form([["1", "0"], ["0", "-1"]], C2)
    assert geo.det == -1
    expected = DiffOperator.monomial(C2, (1, 0), (1, 0)) - DiffOperator.monomial(C2, (0, 1), (0, 1))
    assert geo.laplacian == expected


def test_degenerate_metric():
    with pytest.raises(DegenerateMetric):
        chart_geometry(P("z1*w1 + z2", C2))
    with pytest.raises(DegenerateMetric):
        chart_geometry(P("z1^2 + w1"))


def test_form_arith_examples():
    omega = ddbar(P("log(1+z1*w1)"))
    zero = Form11.zero(C1)
    w = FormalSeries({-1: omega}, 3, zero)
    half = form_arith(w, -w, "sub", None)
    assert form_arith(half, None, "scale", Fraction(1, 2)) == w
    assert (omega * Fraction(2, 2)) == form([["1/(1+z1*w1)^2"]])
    flat = FormalSeries({-1: ddbar(P("z1*w1"))}, 3, zero)
    assert form_arith(flat, -flat, "add").is_zero()


def test_cp2_inverse_metric():
    geo = chart_geometry(P("log(1+z1*w1+z2*w2)", C2))
    m = 2
    for k in range(m):
        for j in range(m):
            s = sum((geo.g[k, l] * geo.ginv[l][j] for l in range(m)), Expression.zero(C2))
            assert s == (1 if k == j else 0)


# -- properties ------------------------------------------------------------------

POTENTIALS = [
    "z1*w1 + z2*w2",
    "log(1+z1*w1+z2*w2)",
    "z1*w1 - z2*w2 + z1^2*w2^2/3",
    "z1*w1 + z2*w2 + log(1+z1*w1)",
    "(z1*w1)^2 + z2*w2 + z1*w2 + z2*w1",
]
HOLOMORPHIC = ["z1^2", "z1*z2 - 3", "1/(1+z2)", "log(1+z1)", "z2^3/7"]
ANTIHOLOMORPHIC = ["w1^2", "w1*w2", "1/(2+w1)", "log(1+w2)", "5*w2"]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(POTENTIALS), st.sampled_from(HOLOMORPHIC), st.sampled_from(ANTIHOLOMORPHIC))
def test_ddbar_ignores_pluriharmonic_summands(p, a, b):
    assert ddbar(P(p, C2) + P(a, C2) + P(b, C2)) == ddbar(P(p, C2))


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(POTENTIALS))
def test_geometry_invariants(p):
    geo = chart_geometry(P(p, C2))
    assert geo.g.is_closed() and geo.rho.is_closed()
    for k in range(2):
        for j in range(2):
            s = sum((geo.g[k, l] * geo.ginv[l][j] for l in range(2)), Expression.zero(C2))
            assert s == (1 if k == j else 0)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(POTENTIALS), st.sampled_from(HOLOMORPHIC), st.sampled_from(ANTIHOLOMORPHIC))
def test_laplacian_of_separated_product(p, a_text, b_text):
    geo = chart_geometry(P(p, C2))
    a, b = P(a_text, C2), P(b_text, C2)
    expected = Expression.zero(C2)
    for k in range(2):
        for l in range(2):
            expected = expected + geo.ginv[l][k] * b.partial(f"w{l + 1}") * a.partial(f"z{k + 1}")
    assert op_apply(geo.laplacian, a * b) == expected


def test_closedness_detects_non_closed_forms():
    assert not form([["z2", "0"], ["0", "1"]], C2).is_closed()
    assert not form([["w2", "0"], ["0", "1"]], C2).is_closed()
    assert form([["1", "0"], ["0", "1"]], C2).is_closed()
