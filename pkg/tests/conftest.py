from __future__ import annotations

import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from starsep import Chart, Expression, FormalSeries, build_star, chart_geometry, dual_potential, parse_expression  # noqa: E402

ACCEPTANCE_LINES: list[str] = []

POTENTIALS = {
    "flat1": (1, {-1: "z1*w1"}),
    "flat2": (2, {-1: "z1*w1 + z2*w2"}),
    "pseudo2": (2, {-1: "z1*w1 - z2*w2"}),
    "cp1": (1, {-1: "log(1+z1*w1)"}),
    "cp1-inv": (1, {-1: "log(1+z1*w1)", 0: "-log(1+z1*w1)"}),
    "cp1-nu": (1, {-1: "log(1+z1*w1)", 1: "log(1+z1*w1)"}),
    "cp2": (2, {-1: "log(1+z1*w1+z2*w2)"}),
}


def expr(text: str, m: int = 1) -> Expression:
    return parse_expression(text, Chart(m))


def potential(name: str, valid_to: int = 6) -> FormalSeries:
    m, pots = POTENTIALS[name]
    chart = Chart(m)
    return FormalSeries({r: parse_expression(t, chart) for r, t in pots.items()}, valid_to, Expression.zero(chart))


@lru_cache(maxsize=None)
def product(name: str, order: int):
    phi = potential(name)
    return build_star(chart_geometry(phi[-1]), phi, order)


@lru_cache(maxsize=None)
def trace(name: str, order: int):
    return dual_potential(product(name, order))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def chart1() -> Chart:
    return Chart(1)


@pytest.fixture
def chart2() -> Chart:
    return Chart(2)
