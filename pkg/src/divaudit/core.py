"""Domain types, the pluggable similarity metric, and exact disparity helpers.

A similarity metric is any object that maps two equal-dimension vectors to a
nonnegative real via ``metric(a, b)``.  Metrics may additionally expose
``matrix(rows_a, rows_b)`` returning the full pairwise similarity matrix;
the helpers below use that fast path when present and fall back to a pair
loop otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptySetError,
    InsufficientClassExamplesError,
    InvalidParameterError,
    ZeroVectorError,
)

Array = np.ndarray

# Row-block size for pairwise reductions.  Fixed so the summation order, and
# therefore the floating-point result, is identical from run to run.
_BLOCK = 1024


def as_matrix(vectors: object, *, name: str = "vectors") -> Array:
    """Coerce input to a float64 (n, d) matrix and validate every entry.

    Rejects non-finite entries and zero-norm rows: a vector with no direction
    cannot be compared under any direction-based metric, so bad rows are
    refused at ingestion rather than deep inside an estimate.
    """
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    if arr.ndim != 2:
        raise DimensionMismatchError(
            f"{name} must be a 2-d array of row vectors, got shape {arr.shape}"
        )
    if arr.size:
        if not np.isfinite(arr).all():
            raise InvalidParameterError(f"{name} contains non-finite entries")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(norms == 0.0):
            bad = int(np.flatnonzero(norms == 0.0)[0])
            raise ZeroVectorError(f"{name}[{bad}] is a zero vector")
    return arr


def make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Return a PCG64 generator; pass an existing Generator through unchanged.

    The generator family is fixed here so that every seeded draw in the
    library is reproducible across platforms.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class CosinePlusOne:
    """Cosine similarity shifted by one so scores land in [0, 2].

    The shift keeps the metric nonnegative: opposite directions score 0,
    orthogonal directions 1, identical directions 2.
    """

    name = "cosine1"
    upper_bound = 2.0

    def __call__(self, a: object, b: object) -> float:
        va = np.asarray(a, dtype=np.float64).reshape(-1)
        vb = np.asarray(b, dtype=np.float64).reshape(-1)
        if va.shape != vb.shape:
            raise DimensionMismatchError(
                f"vectors of dimension {va.size} and {vb.size} cannot be compared"
            )
        if va.size == 0:
            raise InvalidParameterError("zero-dimensional vectors are not allowed")
        na = float(np.linalg.norm(va))
        nb = float(np.linalg.norm(vb))
        if na == 0.0 or nb == 0.0:
            raise ZeroVectorError("zero vector has no direction")
        value = 1.0 + float(va @ vb) / (na * nb)
        return min(max(value, 0.0), 2.0)

    def matrix(self, rows_a: object, rows_b: object) -> Array:
        a = np.atleast_2d(np.asarray(rows_a, dtype=np.float64))
        b = np.atleast_2d(np.asarray(rows_b, dtype=np.float64))
        if a.shape[1] != b.shape[1]:
            raise DimensionMismatchError(
                f"row dimensions differ: {a.shape[1]} vs {b.shape[1]}"
            )
        out = 1.0 + _unit_rows(a) @ _unit_rows(b).T
        np.clip(out, 0.0, 2.0, out=out)
        return out


def _unit_rows(m: Array) -> Array:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ZeroVectorError("zero vector has no direction")
    return m / norms


_METRICS = {"cosine1": CosinePlusOne()}

DEFAULT_METRIC = _METRICS["cosine1"]


def get_metric(name: str) -> CosinePlusOne:
    """Look up a registered similarity metric by name."""
    try:
        return _METRICS[name]
    except KeyError:
        raise InvalidParameterError(
            f"unknown metric {name!r}; known: {sorted(_METRICS)}"
        ) from None


def pair_matrix(metric: object, rows_a: Array, rows_b: Array) -> Array:
    """Pairwise similarity matrix, via the metric's fast path when it has one."""
    fast = getattr(metric, "matrix", None)
    if fast is not None:
        return np.atleast_2d(fast(rows_a, rows_b))
    a = np.atleast_2d(np.asarray(rows_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(rows_b, dtype=np.float64))
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            out[i, j] = metric(a[i], b[j])
    return out


def mean_pair_sim(metric: object, rows_a: Array, rows_b: Array) -> float:
    """Mean similarity over the full pair product rows_a x rows_b.

    Accumulates over fixed-size row blocks in input order, so the result is
    bit-stable for a given input ordering.
    """
    a = np.atleast_2d(np.asarray(rows_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(rows_b, dtype=np.float64))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptySetError("mean similarity over an empty pair product")
    total = 0.0
    for start in range(0, a.shape[0], _BLOCK):
        total += float(pair_matrix(metric, a[start : start + _BLOCK], b).sum())
    return total / (a.shape[0] * b.shape[0])


def mean_within_sim(metric: object, rows: Array) -> float:
    """Mean similarity over ordered within-set pairs, self-pairs excluded.

    Needs at least two rows; the divisor is n * (n - 1).
    """
    a = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    n = a.shape[0]
    if n < 2:
        raise EmptySetError("within-set mean needs at least two elements")
    total = 0.0
    for start in range(0, n, _BLOCK):
        block = pair_matrix(metric, a[start : start + _BLOCK], a)
        rows_in_block = block.shape[0]
        diag = block[np.arange(rows_in_block), start + np.arange(rows_in_block)]
        total += float(block.sum()) - float(diag.sum())
    return total / (n * (n - 1))


def sum_row_mean_sim(metric: object, rows: Array, targets: Array) -> float:
    """Sum over rows of the mean similarity from that row to ``targets``.

    This is the running-sum form used by the incremental estimator: dividing
    by the number of rows gives the set-to-set mean similarity.
    """
    a = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    t = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if t.shape[0] == 0:
        raise EmptySetError("mean similarity to an empty target set")
    if a.shape[0] == 0:
        return 0.0
    total = 0.0
    for start in range(0, a.shape[0], _BLOCK):
        block = pair_matrix(metric, a[start : start + _BLOCK], t)
        total += float(block.mean(axis=1).sum())
    return total


def mean_sim_to_set(x: object, targets: Array, metric: object = DEFAULT_METRIC) -> float:
    """Mean similarity from a single vector to every element of ``targets``."""
    row = np.asarray(x, dtype=np.float64).reshape(1, -1)
    t = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if t.shape[0] == 0:
        raise EmptySetError("mean similarity to an empty set")
    return float(pair_matrix(metric, row, t).mean())


def mean_sim_set_to_set(
    rows: Array, targets: Array, metric: object = DEFAULT_METRIC
) -> float:
    """Mean similarity over all pairs between two sets of row vectors."""
    return mean_pair_sim(metric, rows, targets)


def _check_labels(labels: object, *, name: str = "labels") -> Array:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise InvalidParameterError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


@dataclass
class Collection:
    """An ordered set of vectors under audit.

    ``hidden_labels`` exist only for synthetic or benchmark data where the
    ground truth is known; estimators never read them.
    """

    vectors: Array
    hidden_labels: Array | None = None

    def __post_init__(self) -> None:
        self.vectors = as_matrix(self.vectors, name="collection")
        if self.hidden_labels is not None:
            self.hidden_labels = _check_labels(self.hidden_labels, name="hidden_labels")
            if self.hidden_labels.shape[0] != self.vectors.shape[0]:
                raise DimensionMismatchError(
                    "hidden_labels length does not match the number of vectors"
                )

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass
class LabeledSet:
    """Vectors with known group labels in {0, 1}."""

    vectors: Array
    labels: Array

    def __post_init__(self) -> None:
        self.vectors = as_matrix(self.vectors, name="labeled vectors")
        self.labels = _check_labels(self.labels)
        if self.labels.shape[0] != self.vectors.shape[0]:
            raise DimensionMismatchError("labels length does not match vectors")

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def class_vectors(self, label: int) -> Array:
        return self.vectors[self.labels == label]

    def count(self, label: int) -> int:
        return int(np.count_nonzero(self.labels == label))

    def to_control_set(self) -> "ControlSet":
        return ControlSet(t0=self.class_vectors(0), t1=self.class_vectors(1))

    def to_collection(self) -> Collection:
        return Collection(self.vectors.copy(), self.labels.copy())


@dataclass
class ControlSet:
    """Labeled reference vectors split into the two group partitions.

    Either partition may be empty (a proportional sample can miss a class);
    operations that need both partitions raise their own errors.
    """

    t0: Array
    t1: Array
    stats: "object | None" = field(default=None, compare=False)

    def __post_init__(self) -> None:
        self.t0 = _control_rows(self.t0, name="t0")
        self.t1 = _control_rows(self.t1, name="t1")
        if self.t0.shape[0] and self.t1.shape[0] and self.t0.shape[1] != self.t1.shape[1]:
            raise DimensionMismatchError(
                f"control partitions have different dimensions: "
                f"{self.t0.shape[1]} vs {self.t1.shape[1]}"
            )

    @property
    def size(self) -> int:
        return self.t0.shape[0] + self.t1.shape[0]

    def to_labeled_set(self) -> LabeledSet:
        vectors = np.vstack([self.t0, self.t1]) if self.size else self.t0
        labels = np.concatenate(
            [np.zeros(self.t0.shape[0], dtype=np.int64), np.ones(self.t1.shape[0], dtype=np.int64)]
        )
        return LabeledSet(vectors, labels)


def _control_rows(rows: object, name: str) -> Array:
    arr = np.asarray(rows, dtype=np.float64)
    if arr.size == 0:
        return arr.reshape(0, arr.shape[1] if arr.ndim == 2 else 0)
    return as_matrix(arr, name=name)


def true_disparity(labels: object) -> float:
    """Exact group disparity of a fully labeled set: share of 0s minus share of 1s."""
    arr = _check_labels(labels)
    n = arr.shape[0]
    if n == 0:
        raise EmptySetError("disparity of an empty label set")
    n1 = int(arr.sum())
    n0 = n - n1
    return (n0 - n1) / n


@dataclass(frozen=True)
class GammaEstimate:
    """Separation statistics of a labeled sample.

    ``mu_same`` pools unordered same-label pairs over both classes;
    ``within0`` and ``within1`` are the per-class means kept as diagnostics.
    """

    mu_same: float
    mu_diff: float
    gamma: float
    within0: float
    within1: float


def estimate_gamma(labeled: LabeledSet, metric: object = DEFAULT_METRIC) -> GammaEstimate:
    """Estimate how much more similar same-label pairs are than cross-label pairs.

    Needs at least two examples of each class so both within-class means exist.
    """
    x0 = labeled.class_vectors(0)
    x1 = labeled.class_vectors(1)
    if x0.shape[0] < 2 or x1.shape[0] < 2:
        raise InsufficientClassExamplesError(
            f"need at least two examples per class, got {x0.shape[0]} and {x1.shape[0]}"
        )
    within0 = mean_within_sim(metric, x0)
    within1 = mean_within_sim(metric, x1)
    pairs0 = x0.shape[0] * (x0.shape[0] - 1)
    pairs1 = x1.shape[0] * (x1.shape[0] - 1)
    mu_same = (within0 * pairs0 + within1 * pairs1) / (pairs0 + pairs1)
    mu_diff = mean_pair_sim(metric, x0, x1)
    return GammaEstimate(
        mu_same=mu_same,
        mu_diff=mu_diff,
        gamma=mu_same - mu_diff,
        within0=within0,
        within1=within1,
    )
