"""Star products with separation of variables on a pseudo-Kaehler chart, computed exactly."""

from .algebra import Chart, Expression, Jet, RationalFunction, evaluate, normalize, partial
from .grammar import parse_expression
from .kahler import ChartGeometry, Form11, chart_geometry, ddbar, ddbar_series
from .operators import BiDiffOperator, DiffOperator, op_apply
from .series import FormalSeries
from .star import (
    StarProduct,
    TraceData,
    berezin_transform,
    build_star,
    classifying_from_phase,
    dual_potential,
    dual_star,
    phase_form,
    phase_potential,
    star_multiply,
)

from .reparam import Reparam, involution_report, transport_bundle, transport_star

__version__ = "0.1.0"

__all__ = [
    "BiDiffOperator",
    "Chart",
    "ChartGeometry",
    "DiffOperator",
    "Expression",
    "Form11",
    "FormalSeries",
    "Jet",
    "RationalFunction",
    "Reparam",
    "StarProduct",
    "TraceData",
    "berezin_transform",
    "build_star",
    "chart_geometry",
    "classifying_from_phase",
    "ddbar",
    "ddbar_series",
    "dual_potential",
    "dual_star",
    "evaluate",
    "involution_report",
    "normalize",
    "op_apply",
    "parse_expression",
    "partial",
    "phase_form",
    "phase_potential",
    "star_multiply",
    "transport_bundle",
    "transport_star",
]
