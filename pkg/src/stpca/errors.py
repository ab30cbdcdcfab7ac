"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """Raised when an input violates a documented precondition."""


class ParseError(InvalidArgumentError):
    """Malformed tabular input. Carries the offending row/column when known."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class NumericalFailureError(ArithmeticError):
    """An iterative routine produced non-finite values or could not proceed.

    ``last_iterate`` holds whatever state was available when the failure was
    detected, so callers can inspect or restart from it.
    """

    def __init__(self, message, last_iterate=None, stage=None):
        if stage:
            message = f"[{stage}] {message}"
        super().__init__(message)
        self.last_iterate = last_iterate
        self.stage = stage


class DegenerateSubsphereError(NumericalFailureError):
    """A fitted subsphere collapsed to (nearly) a point."""
