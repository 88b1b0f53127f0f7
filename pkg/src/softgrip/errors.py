"""Exception hierarchy shared by the library and the command-line tool.

Every error carries a short machine-readable ``code``; the CLI prints it as
``ERROR:<code>:<message>`` on stderr.
"""


class SoftGripError(Exception):
    code = "ERROR"


class InvalidParams(SoftGripError, ValueError):
    code = "INVALID_PARAMS"


class OutOfRange(SoftGripError, ValueError):
    code = "OUT_OF_RANGE"


class InvalidIndex(SoftGripError, ValueError):
    code = "INVALID_INDEX"


class ParseError(SoftGripError, ValueError):
    code = "PARSE"


class ValidationError(SoftGripError, ValueError):
    code = "VALIDATION"


class OutOfHull(SoftGripError, ValueError):
    """Query lies outside the measured (phi, P1) rectangle or achievable band."""

    code = "OUT_OF_HULL"

    def __init__(self, message, band=None):
        super().__init__(message)
        self.band = band


class DegenerateInput(SoftGripError, ValueError):
    code = "DEGENERATE"


class NoClosure(SoftGripError):
    code = "NO_CLOSURE"


class NotMonotone(SoftGripError):
    code = "NOT_MONOTONE"


class ConvergenceError(SoftGripError, RuntimeError):
    code = "INTERNAL"


class UsageError(SoftGripError):
    code = "USAGE"
