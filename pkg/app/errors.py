"""
Error hierarchy shared by the engines, the CLI and the HTTP routes.

Every error carries a stable exit code for the command line and an optional
witness (a violating subset, a failing face, a report object).
"""
from typing import Any, Optional


class ReskitError(Exception):
    """Base class for all reskit failures."""

    exit_code = 1

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.message = message
        self.witness = witness


class InvalidInput(ReskitError, ValueError):
    """Malformed input: bad files, empty point sets, zero directions."""

    exit_code = 3


class PreconditionViolated(ReskitError):
    """An operation was handed data outside its domain."""


class VerificationFailed(ReskitError):
    """A supplied partition matrix does not pass validation."""


class InternalError(ReskitError):
    """An invariant that should hold by construction was broken."""


class DegeneracyError(InternalError):
    """No generic test point was found within the retry budget."""


class ExceptionalFamily(ReskitError):
    """Exceptional planar triple: no partition matrix certificate exists."""

    exit_code = 2


class NoPartitionFound(ReskitError):
    exit_code = 2


class ResourceLimit(ReskitError):
    exit_code = 2


class NonEssential(ReskitError):
    """The family is not essential; the witness is a violating index subset."""

    exit_code = 4
