"""Manifest-driven pipeline and its line-oriented report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from .errors import StarsepError
from .grammar import parse_expression
from .kahler import chart_geometry, ddbar_series
from .manifest import CHECKS, Manifest
from .reparam import Reparam, involution_report, transport_bundle
from .series import FormalSeries
from .star import (
    StarProduct,
    TraceData,
    berezin_transform,
    build_star,
    berezin_defects,
    c1_expected,
    classifying_from_phase,
    dnu_residual,
    dual_potential,
    dual_star,
    generic_associator,
    omega_identity_residual,
    phase_potential,
    separation_defects,
    unit_defects,
)

TRACE_TOLERANCE = 1e-6


class PipelineError(StarsepError):
    def __init__(self, stage: str, error: Exception):
        self.stage = stage
        self.error = error
        super().__init__(f"stage '{stage}': {type(error).__name__}: {error}")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        head = f"{'PASS' if self.passed else 'FAIL'} {self.name}"
        return f"{head}: {self.detail}" if self.detail else head


@dataclass
class Report:
    header: list[tuple[str, str]] = field(default_factory=list)
    sections: list[tuple[str, list[str]]] = field(default_factory=list)
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, title: str, lines: list[str]) -> None:
        self.sections.append((title, lines))

    def text(self, machine: bool = False) -> str:
        out = ["starsep report"]
        out += [f"{k}: {v}" for k, v in self.header]
        for title, lines in self.sections:
            out += ["", f"== {title} =="] + lines
        if self.checks:
            out += ["", "== checks =="] + [c.line() for c in self.checks]
            passed = sum(c.passed for c in self.checks)
            out.append(f"summary: {passed}/{len(self.checks)} checks passed")
        if machine:
            data = {
                "header": dict(self.header),
                "sections": {title: lines for title, lines in self.sections},
                "checks": [{"name": c.name, "status": "PASS" if c.passed else "FAIL", "detail": c.detail}
                           for c in self.checks],
            }
            out += ["", "== machine ==", json.dumps(data, indent=1, sort_keys=True)]
        return "\n".join(out) + "\n"


@dataclass
class Bundle:
    """Everything the pipeline computed; ``product`` is known to ``order + 1``."""

    manifest: Manifest
    potential: FormalSeries
    phase_input: FormalSeries | None
    product: StarProduct
    trace: TraceData

    @property
    def order(self) -> int:
        return self.manifest.order

    @property
    def reported(self) -> StarProduct:
        return self.product.truncated(self.order)


def _stage(name: str, fn: Callable, *args):
    try:
        return fn(*args)
    except StarsepError as exc:
        raise PipelineError(name, exc) from exc


def compute(manifest: Manifest) -> Bundle:
    N = manifest.order
    given = manifest.potential_series()
    geometry = _stage("geometry", chart_geometry, given[-1])
    phase_input = None
    if manifest.mode == "phase":
        phase_input = given
        potential = _stage("classifying form from phase form", classifying_from_phase, geometry, given, N)
    else:
        potential = given
    product = _stage("star product", build_star, geometry, potential, N + 1)
    trace = _stage("dual potential and trace density", dual_potential, product)
    return Bundle(manifest, potential, phase_input, product, trace)


def _form_lines(s: FormalSeries) -> list[str]:
    return s.lines()


def _table_lines(prefix: str, ops) -> list[str]:
    lines = []
    for r, op in enumerate(ops, 1):
        terms = op.term_strings()
        lines.append(f"{prefix}_{r} : " + (" + ".join(terms) if terms else "0"))
    return lines


def _residual(s: FormalSeries) -> str:
    bad = [f"nu^{r} : {s[r]}" for r in range(s.min_exp, s.valid_to + 1) if not s[r] == 0]
    return "; ".join(bad)


def _check(b: Bundle, name: str) -> CheckResult:
    S = b.reported
    N = b.order
    geometry = S.geometry
    if name == "associativity":
        assoc = generic_associator(S)
        return CheckResult(name, assoc.is_zero(), _residual(assoc) if not assoc.is_zero() else f"to order {N}")
    if name == "separation":
        bad = separation_defects(S)
        return CheckResult(name, not bad, "; ".join(bad))
    if name == "unit":
        bad = unit_defects(S)
        return CheckResult(name, not bad, f"C_r(1, f) or C_r(f, 1) nonzero at r = {bad}" if bad else "")
    if name == "c1":
        expected = c1_expected(geometry)
        ok = S.C[0] == expected
        return CheckResult(name, ok, "" if ok else f"C_1 = {S.C[0]}, expected {expected}")
    if name == "berezin":
        bad = berezin_defects(S)
        I = berezin_transform(S)
        lap_ok = I[1] == geometry.laplacian
        detail = []
        if bad:
            detail.append(f"I(ab) != b * a at orders {bad}")
        if not lap_ok:
            detail.append(f"I_1 = {I[1]} differs from the Laplacian {geometry.laplacian}")
        return CheckResult(name, not detail, "; ".join(detail))
    if name == "duality":
        twice = dual_star(dual_star(S))
        bad = [r for r, (a, c) in enumerate(zip(twice.C, S.C), 1) if a != c]
        return CheckResult(name, not bad, f"dual of dual differs at orders {bad}" if bad else "")
    if name == "omega-identity":
        res = omega_identity_residual(b.product, b.trace)
        return CheckResult(name, res.is_zero(), _residual(res))
    if name == "dnu-identity":
        res = dnu_residual(b.product, b.trace)
        return CheckResult(name, res.is_zero(), _residual(res))
    if name == "kappa":
        kappa = b.trace.kappa
        problems = []
        if not kappa.vanishes_at_zero():
            problems.append("kappa does not vanish at nu = 0")
        logs = [r for r, c in kappa.items() if c.has_logs()]
        if logs:
            problems.append(f"log atoms at orders {logs}")
        return CheckResult(name, not problems, "; ".join(problems))
    if name == "roundtrip":
        return _roundtrip(b)
    if name == "transport":
        T = Reparam(b.manifest.tau)
        report = transport_bundle(b.product, b.trace, T, strict=False)
        return CheckResult(name, report.ok, f"disagree: {', '.join(report.failures())}" if not report.ok else "")
    if name == "involution":
        T = Reparam(b.manifest.tau)
        if not T.is_proper_involution(N):
            return CheckResult(name, False, f"tau = {T} is not a proper involution to order {N}")
        rep = involution_report(b.product, b.trace, T, N)
        failed = [k for k, v in rep.checks.items() if not v]
        return CheckResult(name, rep.ok, f"failed: {', '.join(failed)}" if failed else "")
    if name == "trace":
        return _trace(b)
    raise ValueError(f"unknown check {name!r}")


def _roundtrip(b: Bundle) -> CheckResult:
    N = b.order
    geometry = b.product.geometry
    phase = phase_potential(b.potential.truncate(N), b.trace.psi.truncate(N))
    problems = []
    back = classifying_from_phase(geometry, phase, N)
    if not ddbar_series(back).agrees(ddbar_series(b.potential), N):
        problems.append("classifying form not recovered from its phase form")
    if b.phase_input is not None and not ddbar_series(phase).agrees(ddbar_series(b.phase_input), N):
        problems.append("phase form of the reconstructed product differs from the input")
    return CheckResult("roundtrip", not problems, "; ".join(problems))


def _trace(b: Bundle) -> CheckResult:
    from .numeric import trace_defects

    chart = b.product.chart
    if chart.m != 1:
        return CheckResult("trace", False, "numeric chart integrals need m = 1")
    f = parse_expression(b.manifest.trace_f, chart)
    g = parse_expression(b.manifest.trace_g, chart)
    radius = b.manifest.trace_radius
    top = min(b.order, b.trace.mu.valid_to + 1)
    values = trace_defects(b.product, b.trace, f, g, range(-chart.m, top + 1), radius)
    worst = max(abs(v) for v in values.values())
    return CheckResult("trace", worst < TRACE_TOLERANCE,
                       f"max |integral| = {worst:.1e} over orders {-chart.m}..{top}, radius {radius:g}")


def run_checks(b: Bundle, names) -> list[CheckResult]:
    results = []
    for name in names:
        try:
            results.append(_check(b, name))
        except StarsepError as exc:
            results.append(CheckResult(name, False, f"error: {type(exc).__name__}: {exc}"))
    return results


def _header(m: Manifest) -> list[tuple[str, str]]:
    h = [("chart dimension", str(m.m)), ("mode", m.mode), ("order", str(m.order)),
         ("internal order", f"star product to nu^{m.order + 1}, dual potential to nu^{m.order}")]
    if m.tau is not None:
        h.append(("tau", str(Reparam(m.tau))))
    return h


def run(manifest: Manifest, checks=None, details: bool = True) -> Report:
    """Run the pipeline; ``checks`` defaults to the manifest's list."""
    names = tuple(manifest.checks if checks is None else checks)
    b = compute(manifest)
    report = Report(_header(manifest))
    N = manifest.order
    if details:
        S = b.reported
        report.add("potential", b.potential.truncate(N).lines())
        report.add("classifying form", _form_lines(ddbar_series(b.potential.truncate(N))))
        report.add("metric", [str(S.geometry.g), f"det : {S.geometry.det}"])
        report.add("Ricci form", [str(S.geometry.rho)])
        report.add("star product", _table_lines("C", S.C))
        I = berezin_transform(S)
        report.add("Berezin transform", [f"I_{r} : " + " + ".join(I[r].term_strings()) for r in range(1, N + 1)])
        report.add("dual potential", b.trace.psi.lines())
        report.add("dual form", _form_lines(ddbar_series(b.trace.psi)))
        kappa = b.trace.kappa
        constant = all(c.is_constant() for _, c in kappa.items())
        report.add("kappa", kappa.lines(start=1) + [f"constant on the chart: {'yes' if constant else 'no'}"])
        report.add("trace density", b.trace.mu.lines())
        phase = phase_potential(b.potential.truncate(N), b.trace.psi)
        report.add("phase form", _form_lines(ddbar_series(phase)))
        if manifest.tau is not None:
            report.add("reparametrization", _reparam_lines(b))
    report.checks = run_checks(b, names)
    return report


def _reparam_lines(b: Bundle) -> list[str]:
    T = Reparam(b.manifest.tau)
    N = b.order
    try:
        rep = transport_bundle(b.product, b.trace, T, strict=False)
    except StarsepError as exc:
        return [f"transport failed: {type(exc).__name__}: {exc}"]
    lines = [f"{c.name} : {'equal' if c.equal else 'DIFFERENT'} (formula vs rebuilt, to nu^{c.order})"
             for c in rep.comparisons]
    if T.is_proper_involution(N):
        inv = involution_report(b.product, b.trace, T, N)
        lines += [f"condition {k} : {v}" for k, v in inv.conditions.items()]
        lines += [f"{k} : {v}" for k, v in inv.checks.items()]
        lines.append("orders of X_r : " + ", ".join(f"X_{r}: {o}" for r, o in sorted(inv.x_orders.items())))
    else:
        lines.append(f"proper involution to order {N} : False")
    return lines


__all__ = ["CHECKS", "Bundle", "CheckResult", "PipelineError", "Report", "compute", "run", "run_checks"]
