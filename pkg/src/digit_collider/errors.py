"""Errors raised by digit-collider."""

from typing import Any, Optional


class ColliderError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class InvalidBaseError(ColliderError, ValueError):
    """Digit base smaller than two."""


class InvalidInputError(ColliderError, ValueError):
    """Argument outside the domain of an operation."""


class PreconditionError(ColliderError, ValueError):
    """Operation precondition violated."""


class RangeError(ColliderError, ValueError):
    """Value outside of the representable range."""


class ResourceLimitError(ColliderError):
    """Request too expensive for exact computation."""


class InvalidParamsError(ColliderError, ValueError):
    """Parameter bundle violates its consistency constraints."""


class ParametersTooSmallError(InvalidParamsError):
    """Parameters too small for the block assembler (increase eta)."""


class EmptyIntervalError(ColliderError):
    """Sampling interval of a progression is empty."""


class DegenerateFitError(ColliderError, ValueError):
    """Not enough distinct points for a fit."""


class ConstructionError(ColliderError):
    """A constructed object failed its verification."""


class BFileError(ColliderError):
    """Malformed b-file."""


class SearchFailureError(ColliderError):
    """A randomized search exhausted its budget."""

    def __init__(
        self,
        message: str,
        best_candidate: Optional[Any] = None,
        statistics: Optional[dict[str, Any]] = None,
    ) -> None:
        super().__init__(message)
        self.best_candidate = best_candidate
        self.statistics = statistics or {}
