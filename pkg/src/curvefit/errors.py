"""Exception hierarchy shared by every curvefit module.

All data-level failures derive from :class:`CurveFitError` so the CLI can map
them to a single exit code.
"""


class CurveFitError(Exception):
    """Base class for data and numerical errors raised by curvefit."""


class EmptyFile(CurveFitError):
    pass


class MissingColumn(CurveFitError):
    def __init__(self, name):
        super().__init__(f"column {name!r} not found in header")
        self.name = name


class ParseError(CurveFitError):
    def __init__(self, row, column, token):
        super().__init__(f"row {row}, column {column!r}: cannot parse {token!r} as a finite real")
        self.row = row
        self.column = column
        self.token = token


class AllMissing(CurveFitError):
    pass


class NoObservedValues(CurveFitError):
    pass


class InsufficientData(CurveFitError):
    pass


class DomainError(CurveFitError):
    def __init__(self, index, message=None):
        super().__init__(message or f"x[{index}] is outside the model domain")
        self.index = index


class NonFinite(CurveFitError):
    pass


class InvalidBounds(CurveFitError):
    pass


class InvalidConfig(CurveFitError):
    pass


class TooShort(CurveFitError):
    pass


class ShapeMismatch(CurveFitError):
    pass


class EmptyData(CurveFitError):
    pass


class WriteError(CurveFitError):
    pass


class NoConvergenceWarning(UserWarning):
    """Iterative solver exhausted its sweep budget; the result is still returned."""
