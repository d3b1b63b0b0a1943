"""Greedy construction of high-separation control sets from a labeled pool.

Each candidate is scored by how much more similar it is to its own group than
to the other one; the greedy loop then trades that score off against
redundancy with already chosen elements, so the control set covers the group
instead of collapsing onto near-duplicates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Array,
    ControlSet,
    DEFAULT_METRIC,
    LabeledSet,
    as_matrix,
    mean_pair_sim,
    pair_matrix,
)
from .errors import (
    DimensionMismatchError,
    EmptySetError,
    InfeasibleConfigError,
    InsufficientClassExamplesError,
    InvalidParameterError,
)


@dataclass
class AuxiliarySet:
    """Labeled pool the control set is selected from, split by group."""

    u0: Array
    u1: Array

    def __post_init__(self) -> None:
        self.u0 = as_matrix(self.u0, name="u0")
        self.u1 = as_matrix(self.u1, name="u1")
        if self.u0.shape[0] < 2 or self.u1.shape[0] < 2:
            raise InsufficientClassExamplesError(
                f"each auxiliary group needs >= 2 elements, "
                f"got {self.u0.shape[0]} and {self.u1.shape[0]}"
            )
        if self.u0.shape[1] != self.u1.shape[1]:
            raise DimensionMismatchError(
                f"auxiliary groups have different dimensions: "
                f"{self.u0.shape[1]} vs {self.u1.shape[1]}"
            )

    @classmethod
    def from_labeled(cls, pool: LabeledSet) -> "AuxiliarySet":
        return cls(u0=pool.class_vectors(0), u1=pool.class_vectors(1))


@dataclass(frozen=True)
class AdaptiveConfig:
    """Settings for greedy control-set selection.

    size: total control size; split evenly across the two groups.
    alpha: redundancy penalty weight.  1.0 suits dense image-style
        embeddings; sparse text-style features usually want around 0.1.
    """

    size: int
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.size < 2 or self.size % 2 != 0:
            raise InvalidParameterError("size must be an even integer >= 2")
        if self.alpha < 0.0:
            raise InvalidParameterError("alpha must be nonnegative")


def per_element_gamma(
    u: AuxiliarySet, metric: object = DEFAULT_METRIC
) -> tuple[Array, Array]:
    """Separation score of every pool element.

    For an element this is its mean similarity to the rest of its own group
    (itself excluded) minus its mean similarity to the whole other group.
    Returns one score array per group, aligned with the pool rows.
    """
    scores: list[Array] = []
    for own, other in ((u.u0, u.u1), (u.u1, u.u0)):
        n = own.shape[0]
        within = pair_matrix(metric, own, own)
        same_mean = (within.sum(axis=1) - np.diagonal(within)) / (n - 1)
        cross_mean = pair_matrix(metric, own, other).mean(axis=1)
        scores.append(same_mean - cross_mean)
    return scores[0], scores[1]


def build_adaptive_control(
    u: AuxiliarySet, cfg: AdaptiveConfig, metric: object = DEFAULT_METRIC
) -> ControlSet:
    """Select a balanced control set that favors separation and penalizes redundancy.

    Greedy per group: repeatedly take the candidate maximizing its separation
    score minus ``alpha`` times its highest similarity to anything already
    chosen (zero for the first pick).  Ties go to the lowest candidate index,
    so the construction is fully deterministic.
    """
    half = cfg.size // 2
    if half > min(u.u0.shape[0], u.u1.shape[0]):
        raise InfeasibleConfigError(
            f"cannot draw {half} elements per group from pools of "
            f"{u.u0.shape[0]} and {u.u1.shape[0]}"
        )
    gamma0, gamma1 = per_element_gamma(u, metric)
    picked0 = _greedy_pick(u.u0, gamma0, half, cfg.alpha, metric)
    picked1 = _greedy_pick(u.u1, gamma1, half, cfg.alpha, metric)
    return ControlSet(t0=u.u0[picked0], t1=u.u1[picked1])


def _greedy_pick(
    own: Array, gamma_scores: Array, half: int, alpha: float, metric: object
) -> list[int]:
    n = own.shape[0]
    redundancy = np.zeros(n)
    taken = np.zeros(n, dtype=bool)
    picked: list[int] = []
    for _ in range(half):
        objective = gamma_scores - alpha * redundancy
        objective[taken] = -np.inf
        # np.argmax returns the first maximizer, i.e. the lowest index on ties.
        choice = int(np.argmax(objective))
        picked.append(choice)
        taken[choice] = True
        sims = pair_matrix(metric, own, own[choice : choice + 1]).reshape(-1)
        np.maximum(redundancy, sims, out=redundancy)
    return picked


def gamma_of_control(
    t: ControlSet, holdout: LabeledSet, metric: object = DEFAULT_METRIC
) -> float:
    """Measured separation of a control set on held-out labeled data.

    For each group, compare the mean similarity of matching holdout elements
    to that partition against the mean similarity of the other group's
    holdout elements to the same partition, then average over the two groups.
    The holdout must be disjoint from whatever pool built ``t``.
    """
    if t.t0.shape[0] == 0 or t.t1.shape[0] == 0:
        raise EmptySetError("both control partitions must be nonempty")
    h0 = holdout.class_vectors(0)
    h1 = holdout.class_vectors(1)
    if h0.shape[0] == 0 or h1.shape[0] == 0:
        raise InsufficientClassExamplesError("holdout needs examples of both classes")
    term0 = mean_pair_sim(metric, h0, t.t0) - mean_pair_sim(metric, h1, t.t0)
    term1 = mean_pair_sim(metric, h1, t.t1) - mean_pair_sim(metric, h0, t.t1)
    return 0.5 * (term0 + term1)
