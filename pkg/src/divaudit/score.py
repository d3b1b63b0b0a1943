"""Control-set-normalized disparity estimation.

The estimator compares how similar the audited collection is to each control
partition, then rescales both similarities by the control set's own within
and cross group means.  That normalization is what lets a small labeled
control set stand in for labeling the collection itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundInputs, audit_error_bound
from .core import (
    Array,
    Collection,
    ControlSet,
    DEFAULT_METRIC,
    as_matrix,
    mean_pair_sim,
    mean_within_sim,
    sum_row_mean_sim,
)
from .errors import (
    DegenerateNormalizationError,
    DimensionMismatchError,
    EmptySetError,
    GroupTooSmallError,
    IndexOutOfRangeError,
    InvalidParameterError,
)

# Below this margin the normalization denominators are treated as zero and
# the control set is rejected as unable to tell the two groups apart.
DEFAULT_NORM_FLOOR = 1e-6


@dataclass(frozen=True)
class NormStats:
    """Similarity structure of a control set.

    cross: mean similarity over all pairs spanning the two partitions.
    within0 / within1: mean within-partition similarity, self-pairs excluded.
    """

    cross: float
    within0: float
    within1: float


@dataclass(frozen=True)
class DisparityReport:
    """Outcome of one disparity estimate.

    ``estimate`` approximates the share of group 0 minus the share of group 1.
    ``raw_gap`` is the unnormalized difference of mean similarities to the two
    control partitions, kept for methods that have one.  ``diagnostics`` holds
    named reals only, including the running sums that make cheap incremental
    updates possible.
    """

    estimate: float
    method: str
    norm_stats: NormStats | None = None
    raw_gap: float | None = None
    diagnostics: dict[str, float] = field(default_factory=dict)


def norm_stats(t: ControlSet, metric: object = DEFAULT_METRIC) -> NormStats:
    """Compute the cross and within similarity means of a control set.

    Each partition needs at least two elements, otherwise the within mean
    (which excludes self-pairs) does not exist.
    """
    if t.t0.shape[0] < 2 or t.t1.shape[0] < 2:
        raise GroupTooSmallError(
            f"each control partition needs >= 2 elements, "
            f"got {t.t0.shape[0]} and {t.t1.shape[0]}"
        )
    return NormStats(
        cross=mean_pair_sim(metric, t.t0, t.t1),
        within0=mean_within_sim(metric, t.t0),
        within1=mean_within_sim(metric, t.t1),
    )


def _pooled_same_mean(stats: NormStats, t: ControlSet) -> float:
    n0 = t.t0.shape[0]
    n1 = t.t1.shape[0]
    pairs0 = n0 * (n0 - 1)
    pairs1 = n1 * (n1 - 1)
    return (stats.within0 * pairs0 + stats.within1 * pairs1) / (pairs0 + pairs1)


def _assemble_report(
    *,
    stats: NormStats,
    sum_sim_t0: float,
    sum_sim_t1: float,
    count: int,
    control_size: int,
    mu_same: float,
    clip: bool,
) -> DisparityReport:
    """Build a report from running sums; shared by fresh and incremental paths."""
    sim_s_t0 = sum_sim_t0 / count
    sim_s_t1 = sum_sim_t1 / count
    denom0 = stats.within0 - stats.cross
    denom1 = stats.within1 - stats.cross
    s0 = (sim_s_t0 - stats.cross) / denom0
    s1 = (sim_s_t1 - stats.cross) / denom1
    estimate = s0 - s1
    gamma_hat = mu_same - stats.cross
    diagnostics: dict[str, float] = {
        "gamma_hat": gamma_hat,
        "mu_same_hat": mu_same,
        "mu_diff_hat": stats.cross,
        "sum_sim_t0": sum_sim_t0,
        "sum_sim_t1": sum_sim_t1,
        "count": float(count),
        "clipped": 1.0 if clip else 0.0,
    }
    if stats.cross > 0.0 and gamma_hat > 0.0:
        bound = audit_error_bound(
            BoundInputs(
                collection_size=count,
                control_size=control_size,
                mu_diff=stats.cross,
                gamma=gamma_hat,
                mu_same=mu_same,
            )
        )
        diagnostics["delta"] = bound.delta
        diagnostics["additive_error"] = bound.additive_error
        diagnostics["success_probability"] = bound.success_probability
    if clip:
        diagnostics["estimate_unclipped"] = estimate
        estimate = min(max(estimate, -1.0), 1.0)
    return DisparityReport(
        estimate=estimate,
        method="divscore",
        norm_stats=stats,
        raw_gap=sim_s_t0 - sim_s_t1,
        diagnostics=diagnostics,
    )


def divscore(
    s: Collection,
    t: ControlSet,
    metric: object = DEFAULT_METRIC,
    *,
    norm_floor: float = DEFAULT_NORM_FLOOR,
    clip: bool = False,
) -> DisparityReport:
    """Estimate the disparity of an unlabeled collection against a control set.

    The estimate is not clipped to [-1, 1] unless ``clip`` is set; out-of-range
    values are informative about estimator noise.

    Raises DegenerateNormalizationError when either within mean is within
    ``norm_floor`` of the cross mean, since the normalization then divides by
    (almost) zero.
    """
    if len(s) == 0:
        raise EmptySetError("cannot audit an empty collection")
    stats = t.stats if isinstance(t.stats, NormStats) else norm_stats(t, metric)
    _check_degenerate(stats, t, norm_floor)
    if s.vectors.shape[1] != t.t0.shape[1]:
        raise DimensionMismatchError(
            f"collection dimension {s.vectors.shape[1]} does not match "
            f"control dimension {t.t0.shape[1]}"
        )
    return _assemble_report(
        stats=stats,
        sum_sim_t0=sum_row_mean_sim(metric, s.vectors, t.t0),
        sum_sim_t1=sum_row_mean_sim(metric, s.vectors, t.t1),
        count=len(s),
        control_size=t.size,
        mu_same=_pooled_same_mean(stats, t),
        clip=clip,
    )


def _check_degenerate(stats: NormStats, t: ControlSet, norm_floor: float) -> None:
    if norm_floor <= 0.0:
        raise InvalidParameterError("norm_floor must be positive")
    gamma_hat = _pooled_same_mean(stats, t) - stats.cross
    for name, within in (("within0", stats.within0), ("within1", stats.within1)):
        if abs(within - stats.cross) < norm_floor:
            raise DegenerateNormalizationError(
                f"{name} ({within:.6g}) is within {norm_floor:g} of the cross mean "
                f"({stats.cross:.6g}); the control set cannot separate the groups",
                gamma_hat=gamma_hat,
            )


def apply_update(
    s: Collection, added: object, removed_indices: object
) -> Collection:
    """Return the collection after removing the given indices and appending rows.

    Hidden labels are dropped because added rows carry none.
    """
    removed = _validated_removals(removed_indices, len(s))
    kept = np.delete(s.vectors, removed, axis=0)
    added_rows = _added_rows(added, s.vectors.shape[1])
    if added_rows.shape[0]:
        kept = np.vstack([kept, added_rows]) if kept.size else added_rows
    return Collection(kept)


def incremental_update(
    report: DisparityReport,
    added: object,
    removed_indices: object,
    s: Collection,
    t: ControlSet,
    metric: object = DEFAULT_METRIC,
) -> DisparityReport:
    """Re-estimate after edits to the collection without a full recompute.

    ``s`` is the collection the report was computed on; ``removed_indices``
    index into it.  Only the contributions of the touched elements are
    (un)accumulated, so the cost is proportional to the edit size, not to
    the collection.  The control set must be the one used for ``report``.
    """
    if report.method != "divscore" or report.norm_stats is None:
        raise InvalidParameterError("incremental updates need a divscore report")
    d = report.diagnostics
    for key in ("sum_sim_t0", "sum_sim_t1", "count"):
        if key not in d:
            raise InvalidParameterError(f"report diagnostics lack {key!r}")
    removed = _validated_removals(removed_indices, len(s))
    added_rows = _added_rows(added, s.vectors.shape[1])
    new_count = int(d["count"]) - removed.size + added_rows.shape[0]
    if new_count <= 0:
        raise EmptySetError("update would leave the collection empty")
    sum0 = d["sum_sim_t0"]
    sum1 = d["sum_sim_t1"]
    if removed.size:
        gone = s.vectors[removed]
        sum0 -= sum_row_mean_sim(metric, gone, t.t0)
        sum1 -= sum_row_mean_sim(metric, gone, t.t1)
    if added_rows.shape[0]:
        sum0 += sum_row_mean_sim(metric, added_rows, t.t0)
        sum1 += sum_row_mean_sim(metric, added_rows, t.t1)
    return _assemble_report(
        stats=report.norm_stats,
        sum_sim_t0=sum0,
        sum_sim_t1=sum1,
        count=new_count,
        control_size=t.size,
        mu_same=_pooled_same_mean(report.norm_stats, t),
        clip=bool(d.get("clipped", 0.0)),
    )


def _validated_removals(removed_indices: object, n: int) -> Array:
    arr = np.asarray(removed_indices, dtype=np.int64).reshape(-1)
    if arr.size == 0:
        return arr
    if arr.min() < 0 or arr.max() >= n:
        raise IndexOutOfRangeError(
            f"removal indices must lie in [0, {n}), got {arr.min()}..{arr.max()}"
        )
    if np.unique(arr).size != arr.size:
        raise InvalidParameterError("duplicate removal indices")
    return arr


def _added_rows(added: object, dim: int) -> Array:
    arr = np.asarray(added, dtype=np.float64)
    if arr.size == 0:
        return np.empty((0, dim))
    arr = as_matrix(arr, name="added")
    if arr.shape[1] != dim:
        raise DimensionMismatchError(
            f"added rows have dimension {arr.shape[1]}, collection has {dim}"
        )
    return arr
