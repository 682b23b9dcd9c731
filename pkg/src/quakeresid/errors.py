"""Exception types shared across the toolkit."""


class QuakeResidError(Exception):
    """Base class for all toolkit errors."""


class ParseError(QuakeResidError):
    """A line of an input file could not be parsed."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class SchemaError(QuakeResidError):
    """Input rows are individually valid but mutually inconsistent."""


class ValidationError(QuakeResidError):
    """A value violates a documented invariant."""


class OutsideRegionError(QuakeResidError):
    """A point lies outside the active observation region."""


class DegenerateInfimumError(QuakeResidError):
    """Exact thinning requested on a field whose infimum rate is zero."""
