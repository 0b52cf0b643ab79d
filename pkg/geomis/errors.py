class GeomisError(Exception):
    """Base class for every error raised by geomis."""


class UsageError(GeomisError, ValueError):
    """Invalid input: mismatched dimensions, bad parameters, malformed streams."""


class InstanceFormatError(UsageError):
    """A line of an instance file could not be parsed or validated."""

    def __init__(self, line_number: int, message: str) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class OracleRefusal(GeomisError):
    """The exact solver refused an instance larger than its node limit."""


class CheckFailed(GeomisError):
    """A verification check evaluated to false."""
