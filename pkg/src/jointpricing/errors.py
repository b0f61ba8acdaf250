"""Exception hierarchy shared by all modules.

Two families matter to callers (and to the CLI exit status): bad input
(``ValidationError``) and numerical or data failures that occur on valid
input (``ComputationError``).
"""


class JointPricingError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(JointPricingError, ValueError):
    """An argument violates its documented domain."""


class DomainError(ValidationError):
    """A scalar argument (e.g. a portfolio proportion) is out of range."""


class NoRealRoots(ValidationError):
    """A target loading lies below the minimum attainable joint loading."""


class ComputationError(JointPricingError, ArithmeticError):
    """A computation could not be completed on otherwise valid input."""


class NoConvergence(ComputationError):
    """An iterative solver hit its iteration cap.

    Attributes:
        residual: last fixed-point residual seen by the solver.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class InfeasibleDemand(ComputationError):
    """The demand model attracts no policyholders on either line."""


class DegenerateData(ComputationError):
    """A sample or series has no variability where variability is required."""


class DegenerateFactor(DegenerateData):
    """A residual matrix is numerically rank zero and cannot be factorized."""


class DataMismatch(ValidationError):
    """Two datasets do not share the required index (ages or years)."""


class MalformedRow(ValidationError):
    """A row of an input file cannot be parsed.

    Attributes:
        line: 1-based line number in the source file.
        column: offending column name, if known.
    """

    def __init__(self, message, line=None, column=None):
        where = f"line {line}" if line is not None else "unknown line"
        if column:
            where += f", column {column!r}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


class NonPositiveLoss(MalformedRow):
    """An aggregate loss value is zero or negative."""


class DuplicatePeriod(MalformedRow):
    """The same (period, line_id) pair appears twice."""
