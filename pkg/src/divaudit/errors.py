"""Exception types shared across the audit library.

Every failure the library raises on purpose derives from AuditError, so
callers (and the HTTP service) can catch one base class and map the concrete
type to an error tag.
"""

from __future__ import annotations


class AuditError(Exception):
    """Base class for all audit-specific failures."""


class DimensionMismatchError(AuditError):
    """Vectors with incompatible dimensions were combined."""


class ZeroVectorError(AuditError):
    """A zero-norm vector was supplied where a direction is required."""


class EmptySetError(AuditError):
    """An operation needs at least one element and got none."""


class GroupTooSmallError(AuditError):
    """A control partition is too small for within-group statistics."""


class InsufficientClassExamplesError(AuditError):
    """A labeled pool lacks enough examples of one class."""


class InsufficientExamplesError(AuditError):
    """A pool is smaller than the number of draws requested from it."""


class DegenerateNormalizationError(AuditError):
    """Within-group and cross-group similarity are too close to normalize by.

    Carries the measured separation margin so callers can report how far the
    control set is from being usable.
    """

    def __init__(self, message: str, *, gamma_hat: float | None = None) -> None:
        super().__init__(message)
        self.gamma_hat = gamma_hat


class InvalidParameterError(AuditError):
    """A parameter is outside its documented domain."""


class InfeasibleConfigError(AuditError):
    """A requested configuration cannot be satisfied by the given data."""


class IndexOutOfRangeError(AuditError):
    """An element index does not refer to any element of the collection."""


class FeatureFormatError(AuditError):
    """A feature file does not conform to the documented format."""
