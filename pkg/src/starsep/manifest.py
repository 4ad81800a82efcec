"""Chart manifests: the input format of the command line tool.

A manifest is a list of ``key = value`` lines grouped in bracketed sections.
Blank lines and lines starting with ``#`` are ignored; values may be wrapped
in double quotes::

    [chart]
    m = 1
    mode = classifying        # or: phase
    order = 3

    [potentials]
    phi[-1] = "log(1+z1*w1)"
    phi[0] = "-log(1+z1*w1)"

    [reparam]
    tau = -1, 0, 1            # tau_1, tau_2, ...

    [verify]
    checks = associativity, separation, unit

    [output]
    report = cp1-report.txt

Potentials are ``phi[r]`` in classifying mode and ``phase[r]`` in phase
mode. Orders that are not listed are zero, so the given series is exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import Chart, Expression
from .errors import ExpressionSyntaxError, ManifestError, MissingLeadingPotential
from .grammar import parse_expression
from .series import FormalSeries

CHECKS = (
    "associativity",
    "separation",
    "unit",
    "c1",
    "berezin",
    "duality",
    "omega-identity",
    "dnu-identity",
    "kappa",
    "roundtrip",
    "transport",
    "involution",
    "trace",
)

_SECTIONS = {
    "chart": {"m", "mode", "order"},
    "potentials": set(),
    "reparam": {"tau"},
    "verify": {"checks", "trace_f", "trace_g", "trace_radius"},
    "output": {"report"},
}
_POTENTIAL_KEY = re.compile(r"(phi|phase)\[(-?\d+)\]$")
_SECTION = re.compile(r"\[\s*([A-Za-z_]+)\s*\]$")


@dataclass
class Manifest:
    m: int
    mode: str
    order: int
    potentials: dict[int, str]
    tau: tuple[Fraction, ...] | None = None
    checks: tuple[str, ...] = ()
    report: str | None = None
    trace_f: str = "z1 + w1"
    trace_g: str = "z1*w1"
    trace_radius: float = 2.0
    parsed: dict[int, Expression] = field(default_factory=dict, repr=False)

    @property
    def chart(self) -> Chart:
        return Chart(self.m)

    def potential_series(self) -> FormalSeries:
        """The potentials as an exact series (valid to the largest listed order, at least ``order``)."""
        chart = self.chart
        top = max(max(self.parsed), self.order)
        return FormalSeries(dict(self.parsed), top, Expression.zero(chart))


def _strip_comment(line: str) -> str:
    out, quoted = [], False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out).rstrip()


def _unquote(value: str, col: int, lineno: int) -> tuple[str, int]:
    if value.startswith('"'):
        if len(value) < 2 or not value.endswith('"'):
            raise ManifestError("unterminated string", lineno, col)
        return value[1:-1], col + 1
    return value, col


def _int(value: str, key: str, lineno: int, col: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ManifestError(f"{key} must be an integer, got {value!r}", lineno, col) from None


def parse_manifest(text: str) -> Manifest:
    """Parse and validate manifest text; errors carry 1-based line and column."""
    section = None
    raw: dict[str, tuple[str, int, int]] = {}
    pots: dict[int, tuple[str, str, int, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = _strip_comment(line)
        stripped = body.strip()
        if not stripped:
            continue
        indent = len(body) - len(body.lstrip())
        ms = _SECTION.match(stripped)
        if ms:
            name = ms.group(1)
            if name not in _SECTIONS:
                raise ManifestError(f"unknown section [{name}]", lineno, indent + 1)
            section = name
            continue
        if "=" not in stripped:
            raise ManifestError("expected 'key = value'", lineno, indent + 1)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        key_col = indent + 1
        value = value_part.strip()
        value_col = len(key_part) + 2 + (len(value_part) - len(value_part.lstrip()))
        if section is None:
            raise ManifestError(f"key {key!r} outside of a section", lineno, key_col)
        value, value_col = _unquote(value, value_col, lineno)
        if section == "potentials":
            mk = _POTENTIAL_KEY.match(key)
            if mk is None:
                raise ManifestError(f"unknown potential key {key!r}; use phi[r] or phase[r]", lineno, key_col)
            r = int(mk.group(2))
            if r in pots:
                raise ManifestError(f"potential order {r} given twice", lineno, key_col)
            if r < -1:
                raise ManifestError("potentials start at order -1", lineno, key_col)
            pots[r] = (mk.group(1), value, lineno, value_col)
            continue
        if key not in _SECTIONS[section]:
            raise ManifestError(f"unknown key {key!r} in section [{section}]", lineno, key_col)
        if key in raw:
            raise ManifestError(f"key {key!r} given twice", lineno, key_col)
        raw[key] = (value, lineno, value_col)

    def get(key, default=None):
        return raw[key] if key in raw else (default, 0, 0)

    m_text, ln, col = get("m", "1")
    m = _int(m_text, "m", ln, col)
    if m < 1:
        raise ManifestError("m must be at least 1", ln, col)
    mode, ln, col = get("mode", "classifying")
    if mode not in ("classifying", "phase"):
        raise ManifestError(f"mode must be 'classifying' or 'phase', got {mode!r}", ln, col)
    order_text, ln, col = get("order", "3")
    order = _int(order_text, "order", ln, col)
    if order < 1:
        raise ManifestError("order must be at least 1", ln, col)

    tau = None
    if "tau" in raw:
        tau_text, ln, col = raw["tau"]
        try:
            tau = tuple(Fraction(t.strip()) for t in tau_text.strip("[]").split(","))
        except ValueError:
            raise ManifestError(f"tau must be a list of rationals, got {tau_text!r}", ln, col) from None
        if tau[0] == 0:
            raise ManifestError("tau_1 must be nonzero", ln, col)

    checks: tuple[str, ...] = ()
    if "checks" in raw:
        text_checks, ln, col = raw["checks"]
        checks = tuple(c.strip() for c in text_checks.split(",") if c.strip())
        for c in checks:
            if c not in CHECKS:
                raise ManifestError(f"unknown check {c!r}; known: {', '.join(CHECKS)}", ln, col)
        if ("transport" in checks or "involution" in checks) and tau is None:
            raise ManifestError("transport and involution checks need [reparam] tau", ln, col)

    expected = "phi" if mode == "classifying" else "phase"
    chart = Chart(m)
    parsed = {}
    for r, (kind, text_expr, ln, col) in sorted(pots.items()):
        if kind != expected:
            raise ManifestError(f"{kind}[{r}] does not belong to mode {mode!r}", ln, 1)
        try:
            parsed[r] = parse_expression(text_expr, chart)
        except ExpressionSyntaxError as exc:
            raise ManifestError(f"invalid expression: {exc.message}", ln, col + exc.column - 1) from None
    if -1 not in parsed:
        raise MissingLeadingPotential(f"{expected}[-1] is required")
    for r, e in parsed.items():
        if e.has_jets():
            raise ManifestError(f"{expected}[{r}] must not contain function symbols", pots[r][2], pots[r][3])

    manifest = Manifest(m, mode, order, {r: v[1] for r, v in pots.items()}, tau, checks, parsed=parsed)
    if "report" in raw:
        manifest.report = raw["report"][0]
    for key in ("trace_f", "trace_g"):
        if key in raw:
            text_expr, ln, col = raw[key]
            try:
                parse_expression(text_expr, chart)
            except ExpressionSyntaxError as exc:
                raise ManifestError(f"invalid expression: {exc.message}", ln, col + exc.column - 1) from None
            setattr(manifest, key, text_expr)
    if "trace_radius" in raw:
        text_r, ln, col = raw["trace_radius"]
        try:
            manifest.trace_radius = float(text_r)
        except ValueError:
            raise ManifestError(f"trace_radius must be a number, got {text_r!r}", ln, col) from None
    return manifest


FLAT = """\
# flat C^1 with the Wick-type product
[chart]
m = 1
mode = classifying
order = 3

[potentials]
phi[-1] = "z1*w1"

[reparam]
tau = -1

[verify]
checks = associativity, separation, unit, c1, berezin, duality, omega-identity, dnu-identity, kappa, roundtrip, transport, involution, trace
"""

CP1 = """\
# the invariant product on the Riemann sphere, in the chart C
[chart]
m = 1
mode = classifying
order = 3

[potentials]
phi[-1] = "log(1+z1*w1)"
phi[0] = "-log(1+z1*w1)"

[reparam]
tau = -1

[verify]
checks = associativity, separation, unit, c1, berezin, duality, omega-identity, dnu-identity, kappa, roundtrip, transport, involution, trace
"""

EXAMPLES = {"flat": FLAT, "cp1": CP1}
