"""Baseline estimators and control-set samplers.

The samplers mirror the two natural ways to label a small reference set: a
balanced quota per group, or a plain proportional draw.  The self-training
estimator labels the whole collection greedily instead of normalizing, which
makes it accurate but quadratic in the collection size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Collection,
    ControlSet,
    DEFAULT_METRIC,
    LabeledSet,
    make_rng,
    pair_matrix,
)
from .errors import (
    EmptySetError,
    InsufficientClassExamplesError,
    InsufficientExamplesError,
    InvalidParameterError,
)
from .score import DisparityReport


@dataclass(frozen=True)
class SamplerConfig:
    """How many control elements to draw and under which seed."""

    size: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.size < 1:
            raise InvalidParameterError("size must be >= 1")


def sample_random_balanced(
    pool: LabeledSet, cfg: SamplerConfig, rng: np.random.Generator | None = None
) -> ControlSet:
    """Draw size/2 elements per class uniformly without replacement."""
    if cfg.size % 2 != 0:
        raise InvalidParameterError("balanced sampling needs an even size")
    half = cfg.size // 2
    rng = make_rng(rng if rng is not None else cfg.seed)
    picked: list[np.ndarray] = []
    for label in (0, 1):
        candidates = np.flatnonzero(pool.labels == label)
        if candidates.size < half:
            raise InsufficientClassExamplesError(
                f"class {label} has {candidates.size} examples, need {half}"
            )
        picked.append(rng.choice(candidates, size=half, replace=False))
    return ControlSet(t0=pool.vectors[picked[0]], t1=pool.vectors[picked[1]])


def sample_random_proportional(
    pool: LabeledSet, cfg: SamplerConfig, rng: np.random.Generator | None = None
) -> ControlSet:
    """Draw size elements uniformly without replacement, then split by label.

    Either side of the result may be empty; downstream estimators that need
    both partitions will raise, which is itself informative about the draw.
    """
    n = len(pool)
    if cfg.size > n:
        raise InsufficientExamplesError(f"cannot draw {cfg.size} from a pool of {n}")
    rng = make_rng(rng if rng is not None else cfg.seed)
    draw = rng.choice(n, size=cfg.size, replace=False)
    labels = pool.labels[draw]
    return ControlSet(
        t0=pool.vectors[draw[labels == 0]],
        t1=pool.vectors[draw[labels == 1]],
    )


def iid_measure(t: ControlSet) -> DisparityReport:
    """Disparity of the control set itself, used as a proxy for the collection.

    Only sensible when the control set was sampled proportionally from the
    collection under audit.
    """
    n0 = t.t0.shape[0]
    n1 = t.t1.shape[0]
    if n0 + n1 == 0:
        raise EmptySetError("cannot measure an empty control set")
    return DisparityReport(
        estimate=(n0 - n1) / (n0 + n1),
        method="iid",
        diagnostics={"t0_count": float(n0), "t1_count": float(n1)},
    )


def ss_st(
    s: Collection,
    t: ControlSet,
    metric: object = DEFAULT_METRIC,
    k: int = 5,
) -> DisparityReport:
    """Semi-supervised self-training estimate of the disparity.

    Repeatedly score every remaining element by its mean-similarity gap
    between the two partitions, move the k most confident elements into the
    partition matching their sign, and count them.  Absorbed elements
    influence every later score.  Zero-gap elements are dropped uncounted.
    The returned estimate divides the signed count by the original collection
    size, so dropped elements dilute it toward zero.
    """
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    n_total = len(s)
    if n_total == 0:
        return DisparityReport(
            estimate=0.0,
            method="ss_st",
            diagnostics={
                "iterations": 0.0,
                "assigned0": 0.0,
                "assigned1": 0.0,
                "unassigned": 0.0,
                "count": 0.0,
            },
        )
    if t.t0.shape[0] == 0 or t.t1.shape[0] == 0:
        raise EmptySetError("self-training needs both control partitions nonempty")
    x = s.vectors
    # Running similarity sums of every element to the growing partitions.
    sums0 = pair_matrix(metric, x, t.t0).sum(axis=1)
    sums1 = pair_matrix(metric, x, t.t1).sum(axis=1)
    c0 = t.t0.shape[0]
    c1 = t.t1.shape[0]
    remaining = np.arange(n_total)
    n0 = 0
    n1 = 0
    dropped = 0
    iterations = 0
    while remaining.size:
        scores = sums0[remaining] / c0 - sums1[remaining] / c1
        # Stable sort on the negated magnitude: highest confidence first,
        # ties resolved toward the lowest original index.
        order = np.argsort(-np.abs(scores), kind="stable")[:k]
        chosen = remaining[order]
        chosen_scores = scores[order]
        pos = chosen[chosen_scores > 0.0]
        neg = chosen[chosen_scores < 0.0]
        n0 += pos.size
        n1 += neg.size
        dropped += chosen.size - pos.size - neg.size
        remaining = np.delete(remaining, np.sort(order))
        if remaining.size:
            if pos.size:
                sums0[remaining] += pair_matrix(metric, x[remaining], x[pos]).sum(axis=1)
            if neg.size:
                sums1[remaining] += pair_matrix(metric, x[remaining], x[neg]).sum(axis=1)
        c0 += pos.size
        c1 += neg.size
        iterations += 1
    return DisparityReport(
        estimate=(n0 - n1) / n_total,
        method="ss_st",
        diagnostics={
            "iterations": float(iterations),
            "assigned0": float(n0),
            "assigned1": float(n1),
            "unassigned": float(dropped),
            "count": float(n_total),
        },
    )
