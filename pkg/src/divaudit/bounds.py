"""Concentration-bound calculators for the audit estimate.

Both calculators work from the separation structure of the population:
``mu_diff`` is the expected cross-group similarity, ``gamma`` the margin by
which same-group pairs beat cross-group pairs, and ``mu_same`` their sum
unless measured separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError


@dataclass(frozen=True)
class BoundInputs:
    """Inputs shared by the bound calculators.

    collection_size: number of audited elements.
    control_size: total number of control elements across both partitions.
    mu_diff: expected similarity of a cross-group pair (> 0).
    gamma: same-group minus cross-group expected similarity (> 0).
    mu_same: expected same-group similarity; defaults to mu_diff + gamma.
    delta: half-width of the per-element concentration band, where needed.
    """

    collection_size: int
    control_size: int
    mu_diff: float
    gamma: float
    mu_same: float | None = None
    delta: float | None = None

    def __post_init__(self) -> None:
        if self.collection_size < 1:
            raise InvalidParameterError("collection_size must be >= 1")
        if self.control_size < 2:
            raise InvalidParameterError("control_size must be >= 2")
        if not self.mu_diff > 0.0:
            raise InvalidParameterError("mu_diff must be positive")
        if not self.gamma > 0.0:
            raise InvalidParameterError("gamma must be positive")
        if self.mu_same is not None and not self.mu_same > self.mu_diff:
            raise InvalidParameterError("mu_same must exceed mu_diff")
        if self.delta is not None and not self.delta >= 0.0:
            raise InvalidParameterError("delta must be nonnegative")

    @property
    def same_mean(self) -> float:
        return self.mu_same if self.mu_same is not None else self.mu_diff + self.gamma


@dataclass(frozen=True)
class GapProbability:
    """Clamped and raw forms of a success probability.

    ``raw`` can go negative when the band is too narrow for the control size;
    it is kept so callers can see how far short the guarantee falls.
    """

    probability: float
    raw: float


def gap_success_probability(inputs: BoundInputs) -> GapProbability:
    """Probability that one element's similarity gap lands in the delta band.

    The gap in question is the element's mean similarity to the matching
    control partition minus its mean to the other partition; the bound depends
    only on the control size and the separation parameters.
    """
    if inputs.delta is None:
        raise InvalidParameterError("gap_success_probability needs delta")
    t = inputs.control_size
    d2 = inputs.delta * inputs.delta
    raw = 1.0 - 2.0 * math.exp(-d2 * inputs.mu_diff * t / 6.0) * (
        1.0 + math.exp(-d2 * inputs.gamma * t / 6.0)
    )
    return GapProbability(probability=min(max(raw, 0.0), 1.0), raw=raw)


@dataclass(frozen=True)
class ErrorBound:
    """Additive error envelope for a full audit at a stated success probability."""

    delta: float
    additive_error: float
    success_probability: float


def audit_error_bound(inputs: BoundInputs, *, log_base: float = math.e) -> ErrorBound:
    """Error envelope for the normalized estimate over a whole collection.

    The band half-width is chosen so that, with the stated probability, every
    audited element concentrates at once; the additive error then follows from
    propagating that band through the normalization.  The logarithm base is a
    knob; the natural log is the default.
    """
    if not log_base > 1.0:
        raise InvalidParameterError("log_base must be > 1")
    n = inputs.collection_size
    t = inputs.control_size
    log_term = math.log(20.0 * n) / math.log(log_base)
    delta = math.sqrt(6.0 * log_term / (t * min(inputs.mu_diff, inputs.gamma)))
    mu_same = inputs.same_mean
    additive_error = delta * (mu_same + inputs.mu_diff) / (mu_same - inputs.mu_diff)
    success_probability = 0.9 - 1.0 / (200.0 * n)
    return ErrorBound(
        delta=delta,
        additive_error=additive_error,
        success_probability=success_probability,
    )
