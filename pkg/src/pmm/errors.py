"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: validation problems in user data are
recoverable diagnostics (exit 1), malformed files are schema errors (exit 2),
and a failed internal postcondition is a bug signal (exit 3).
"""


class PmmError(Exception):
    """Base class for all package errors."""


class SchemaError(PmmError):
    """An input document does not match the expected JSON schema or grammar."""


class ParseError(SchemaError):
    """An algebraic expression failed to parse; carries line/column info."""

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ValidationError(PmmError):
    """Mathematically invalid user data (d*d != 0, not simply-connected, ...)."""


class InternalError(PmmError):
    """A verified postcondition failed; indicates a bug, not bad input."""
