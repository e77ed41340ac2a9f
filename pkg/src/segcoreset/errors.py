"""Exception hierarchy shared across the package.

The CLI maps each class to a distinct exit code, so keep the set small and
stable.
"""


class SegCoresetError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SegCoresetError, ValueError):
    """A parameter is outside its documented domain (k < 1, sigma < 0, ...)."""


class BoundsError(SegCoresetError, IndexError):
    """A rectangle does not fit inside the grid it is applied to."""


class ValidationError(SegCoresetError, ValueError):
    """A structured object violates its invariants (overlap, non-cover, ...)."""


class DimensionError(SegCoresetError, ValueError):
    """Two grid-shaped objects disagree on their dimensions."""


class ParseError(SegCoresetError, ValueError):
    """An input file could not be parsed; carries a position when known."""

    def __init__(self, message, line=None, byte=None):
        pos = []
        if line is not None:
            pos.append(f"line {line}")
        if byte is not None:
            pos.append(f"byte {byte}")
        if pos:
            message = f"{message} ({', '.join(pos)})"
        super().__init__(message)
        self.line = line
        self.byte = byte


class SizeGuardError(SegCoresetError):
    """An exact-oracle computation was refused because the input is too large."""
