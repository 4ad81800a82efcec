"""Acceptance criteria, one check per criterion.

Each check returns ``(passed, detail)``. Under pytest every criterion becomes a
test and its PASS/FAIL line is repeated in the terminal summary; run as a
script (``python3 tests/test_acceptance.py``) it prints the lines and exits
nonzero if any criterion fails.
"""

from __future__ import annotations

import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest  # noqa: E402

import oracles  # noqa: E402
from conftest import ACCEPTANCE_LINES, potential, product, trace  # noqa: E402
from starsep import BiDiffOperator, Chart, Expression, FormalSeries, build_star, chart_geometry, ddbar  # noqa: E402
from starsep import ddbar_series, dual_potential, dual_star, parse_expression, phase_potential  # noqa: E402
from starsep.numeric import trace_defects  # noqa: E402
from starsep.reparam import Reparam, involution_report, transport_bundle  # noqa: E402
from starsep.star import (  # noqa: E402
    berezin_transform,
    c1_expected,
    classifying_from_phase,
    generic_associator,
    omega_identity_residual,
)

C1 = Chart(1)
TRACE_RADIUS = 10.0


def _series(coeffs, valid_to, chart=C1):
    return FormalSeries({r: parse_expression(t, chart) for r, t in coeffs.items()}, valid_to, Expression.zero(chart))


def associativity():
    details, ok = [], True
    for name, n in (("flat1", 4), ("flat2", 3), ("cp1-inv", 4)):
        start = time.perf_counter()
        phi = potential(name)
        S = build_star(chart_geometry(phi[-1]), phi, n)
        assoc = generic_associator(S)
        elapsed = time.perf_counter() - start
        case_ok = all(not assoc[r] for r in range(n + 1)) and assoc.valid_to >= n and elapsed < 120
        ok &= case_ok
        details.append(f"{name} N={n} {'exact' if case_ok else 'NONZERO'} {elapsed:.2f}s")
    return ok, "; ".join(details)


def wick_oracle():
    S = product("flat1", 4)
    wick = all(S.c(r) == BiDiffOperator(C1, {((r,), (r,)): Expression.const(C1, Fraction(1, math.factorial(r)))})
               for r in range(1, 5))
    table = oracles.wick_coefficients(3)
    brute = {}
    for (r, a, b), c in table.items():
        brute.setdefault(r, {})[((a,), (b,))] = Expression.const(C1, Fraction(int(c.p), int(c.q)))
    matches = all(S.c(r) == BiDiffOperator(C1, brute[r]) for r in (1, 2, 3))
    return wick and matches, f"C_r = 1/r! for r <= 4: {wick}; brute-force oracle r <= 3: {matches}"


def c1_and_i1():
    names = ["flat1", "flat2", "pseudo2", "cp1", "cp1-inv", "cp2"]
    bad = [n for n in names
           if product(n, 3).c(1) != c1_expected(product(n, 3).geometry)
           or berezin_transform(product(n, 3))[1] != product(n, 3).geometry.laplacian]
    return not bad, f"charts {', '.join(names)}" + (f"; mismatch on {bad}" if bad else "")


def omega_identity():
    details, ok = [], True
    for name in ("flat1", "cp1", "cp1-inv"):
        t = trace(name, 4)
        res = omega_identity_residual(product(name, 4), t)
        logs = any(c.has_logs() for _, c in t.kappa.items())
        case_ok = res.is_zero() and res.valid_to >= 3 and not logs and t.kappa.vanishes_at_zero()
        ok &= case_ok
        details.append(f"{name}: {'exact' if case_ok else 'FAILED'} to nu^{res.valid_to}")
    return ok, "; ".join(details)


def sphere_example():
    S = product("cp1-inv", 5)
    t = trace("cp1-inv", 5)
    phase = ddbar_series(phase_potential(S.potential.truncate(4), t.psi))
    expected = ddbar_series(_series({-1: "log(1+z1*w1)"}, 4))
    phase_ok = phase == expected
    const = all(not t.kappa[r].partial("z1") and not t.kappa[r].partial("w1") for r in range(0, 5))
    values = ", ".join(str(t.kappa[r]) for r in range(1, 5))
    return phase_ok and const, f"phase form = omega_FS/nu to nu^4: {phase_ok}; kappa constant: {const} ({values})"


def phase_round_trip():
    inputs = {
        "flat": _series({-1: "z1*w1"}, 4),
        "omega_FS/nu": _series({-1: "log(1+z1*w1)"}, 4),
        "omega_FS/nu + nu omega_FS": _series({-1: "log(1+z1*w1)", 1: "log(1+z1*w1)"}, 4),
    }
    details, ok = [], True
    for label, pot in inputs.items():
        geo = chart_geometry(pot[-1])
        # classifying form -> phase form -> classifying form
        t = dual_potential(build_star(geo, pot, 4))
        ph = phase_potential(pot.truncate(3), t.psi)
        back = classifying_from_phase(geo, ph, 3)
        forward = ddbar_series(back) == ddbar_series(pot.truncate(3))
        # phase form -> classifying form -> phase form
        phi = classifying_from_phase(geo, pot.truncate(3), 3)
        t2 = dual_potential(build_star(geo, phi, 4))
        backward = ddbar_series(phase_potential(phi, t2.psi)) == ddbar_series(pot.truncate(3))
        ok &= forward and backward
        details.append(f"{label}: {forward}/{backward}")
    return ok, "; ".join(details)


def random_rational_potential(rng: random.Random) -> Expression:
    """A rational potential with a nonzero i d dbar."""
    while True:
        num = " + ".join(f"{rng.randint(-3, 3)}*z1^{rng.randint(1, 2)}*w1^{rng.randint(1, 2)}" for _ in range(2))
        den = f"{rng.randint(2, 5)} + {rng.randint(1, 3)}*z1*w1"
        p = parse_expression(f"({num})/({den})", C1)
        if ddbar(p) != 0:
            return p


def perturbation():
    rng = random.Random(20240601)
    details, ok = [], True
    for r in (2, 3):
        base = product("cp1", r + 1)
        phi = base.potential
        p = random_rational_potential(rng)
        bumped = FormalSeries({**dict(phi.items()), r - 1: phi[r - 1] + p}, phi.valid_to, phi.zero)
        S = build_star(base.geometry, bumped, r + 1)
        I0, I1 = berezin_transform(base).invert(), berezin_transform(S).invert()
        same = S.C[:r] == base.C[:r] and all(I0[k] == I1[k] for k in range(1, r + 1))
        changed = S.C[r] != base.C[r]
        ok &= same and changed
        details.append(f"r={r} p={p}: C_1..C_{r}, ~I_1..~I_{r} unchanged {same}, C_{r + 1} changed {changed}")
    return ok, "; ".join(details)


def duality():
    names = ["flat1", "flat2", "pseudo2", "cp1", "cp1-inv", "cp2"]
    bad = [n for n in names if dual_star(dual_star(product(n, 3))).C != product(n, 3).C]
    return not bad, f"charts {', '.join(names)}" + (f"; differs on {bad}" if bad else "")


def transport():
    details, ok = [], True
    for name in ("flat1", "cp1", "cp1-inv"):
        for coeffs in ([-1], [-1, 0, 1]):
            T = Reparam.from_coefficients(coeffs)
            rep = transport_bundle(product(name, 4), trace(name, 4), T, strict=False)
            ok &= rep.ok and len(rep.comparisons) == 7
            details.append(f"{name} tau={T}: {'all equal' if rep.ok else 'differ: ' + ', '.join(rep.failures())}")
    return ok, "; ".join(details)


def involution():
    T = Reparam.from_coefficients([-1])
    inv = involution_report(product("cp1-inv", 5), trace("cp1-inv", 5), T, 4)
    plain = involution_report(product("cp1", 5), trace("cp1", 5), T, 4)
    invariant_ok = (inv.holds and inv.ok and inv.checks.get("kappa even", False)
                    and inv.checks.get("X_2r = 0", False) and inv.checks.get("mu_T = (-1)^m mu", False))
    plain_ok = plain.consistent and not any(plain.conditions.values())
    detail = (f"invariant product conditions {sorted(set(inv.conditions.values()))}, checks "
              f"{', '.join(k for k, v in inv.checks.items() if v)}; "
              f"omega_FS/nu conditions {sorted(set(plain.conditions.values()))}")
    return invariant_ok and plain_ok, detail


def numeric_trace():
    start = time.perf_counter()
    S = product("cp1-inv", 4)
    t = trace("cp1-inv", 4)
    f = parse_expression("z1 + w1", C1)
    g = parse_expression("z1*w1", C1)
    values = trace_defects(S, t, f, g, range(-1, 3), TRACE_RADIUS)
    elapsed = time.perf_counter() - start
    worst = max(abs(v) for v in values.values())
    return worst < 1e-6 and elapsed < 60, f"max |integral| = {worst:.1e} over nu^-1..nu^2, disc radius {TRACE_RADIUS:g}, {elapsed:.1f}s"


CRITERIA = [
    (1, "associativity", associativity),
    (2, "Wick oracle", wick_oracle),
    (3, "C_1 and I_1", c1_and_i1),
    (4, "omega + dual form + rho = i d dbar kappa", omega_identity),
    (5, "sphere phase form and constant kappa", sphere_example),
    (6, "phase round trip", phase_round_trip),
    (7, "dependence on earlier potentials", perturbation),
    (8, "dual of dual", duality),
    (9, "transport vs rebuild", transport),
    (10, "involution equivalence and parity", involution),
    (11, "numeric trace", numeric_trace),
]


def evaluate(number, title, check) -> tuple[bool, str]:
    try:
        passed, detail = check()
    except Exception as exc:  # a crash is reported as a failure of the criterion
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    return passed, f"{'PASS' if passed else 'FAIL'} criterion {number:2d} {title}: {detail}"


@pytest.mark.parametrize("number, title, check", CRITERIA, ids=[f"criterion-{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, check):
    passed, line = evaluate(number, title, check)
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert passed, line


if __name__ == "__main__":
    results = [evaluate(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(p for p, _ in results) else 1)
