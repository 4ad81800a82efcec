"""Exception hierarchy shared by every module of the package."""


class StarsepError(Exception):
    """Base class for all errors raised by starsep."""


class DivisionByZero(StarsepError, ZeroDivisionError):
    pass


class UnknownVariable(StarsepError, KeyError):
    pass


class PoleAtPoint(StarsepError, ArithmeticError):
    pass


class BranchError(StarsepError, ArithmeticError):
    """A log atom was evaluated on the nonpositive real axis."""


class JetOverflow(StarsepError):
    """A product of jet symbols exceeded the supported degree."""


class NotInvertible(StarsepError, ArithmeticError):
    pass


class SeriesDomainError(StarsepError, ValueError):
    pass


class UnknownCoefficient(StarsepError, IndexError):
    """Requested a series coefficient above its validity order."""


class InvalidReparam(StarsepError, ValueError):
    pass


class DegenerateMetric(StarsepError, ValueError):
    pass


class ConstructionError(StarsepError):
    """An internal consistency check of a construction failed."""


class InsufficientData(StarsepError, ValueError):
    pass


class TheoremViolation(StarsepError):
    """Two routes that must agree produced different results."""


class ManifestError(StarsepError, ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class MissingLeadingPotential(ManifestError):
    pass


class ExpressionSyntaxError(StarsepError, ValueError):
    def __init__(self, message: str, column: int):
        self.message = message
        self.column = column
        super().__init__(f"column {column}: {message}")


class ZeroDivisorInExpression(ExpressionSyntaxError, DivisionByZero):
    """Parsed text divides by an expression that normalizes to zero."""
