"""Synthetic two-cluster data with known labels.

Both groups are isotropic Gaussians around fixed centers.  The angle between
the centers and the noise scale together control how separable the groups
are, which is the single knob the evaluation harness needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Array,
    Collection,
    DEFAULT_METRIC,
    GammaEstimate,
    LabeledSet,
    estimate_gamma,
    make_rng,
)
from .errors import DimensionMismatchError, InvalidParameterError, ZeroVectorError


@dataclass(frozen=True)
class SyntheticModel:
    """Two isotropic Gaussian clusters with unit-norm-ish centers.

    sigma is the per-coordinate standard deviation shared by both clusters.
    The seed is the default randomness for draws that are not handed an
    explicit generator.
    """

    center0: Array
    center1: Array
    sigma: float
    seed: int = 0

    def __post_init__(self) -> None:
        c0 = np.asarray(self.center0, dtype=np.float64).reshape(-1)
        c1 = np.asarray(self.center1, dtype=np.float64).reshape(-1)
        if c0.shape != c1.shape:
            raise DimensionMismatchError("cluster centers must share a dimension")
        if not (np.isfinite(c0).all() and np.isfinite(c1).all()):
            raise InvalidParameterError("cluster centers must be finite")
        if np.linalg.norm(c0) == 0.0 or np.linalg.norm(c1) == 0.0:
            raise ZeroVectorError("cluster centers must be nonzero")
        if not self.sigma >= 0.0:
            raise InvalidParameterError("sigma must be nonnegative")
        object.__setattr__(self, "center0", c0)
        object.__setattr__(self, "center1", c1)

    @property
    def dim(self) -> int:
        return self.center0.shape[0]


def model_from_angle(
    dim: int, angle_degrees: float, sigma: float, seed: int = 0
) -> SyntheticModel:
    """Model with unit centers separated by the given angle in a fixed plane."""
    if dim < 2:
        raise InvalidParameterError("dim must be >= 2 to place two distinct centers")
    theta = math.radians(angle_degrees)
    center0 = np.zeros(dim)
    center0[0] = 1.0
    center1 = np.zeros(dim)
    center1[0] = math.cos(theta)
    center1[1] = math.sin(theta)
    return SyntheticModel(center0=center0, center1=center1, sigma=sigma, seed=seed)


def round_half_up(x: float) -> int:
    """Round to the nearest integer with .5 going up."""
    return int(math.floor(x + 0.5))


def generate_collection(
    model: SyntheticModel,
    n: int,
    f: float,
    rng: np.random.Generator | None = None,
) -> Collection:
    """Draw a shuffled collection with a group-0 fraction of roughly ``f``.

    The group-0 count is round-half-up of f * n.  Hidden labels are retained
    so harnesses can compute the exact disparity.  The same seed yields a
    bit-identical collection.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if not 0.0 <= f <= 1.0:
        raise InvalidParameterError("f must lie in [0, 1]")
    rng = make_rng(rng if rng is not None else model.seed)
    n0 = round_half_up(f * n)
    n1 = n - n0
    x0 = model.center0 + model.sigma * rng.standard_normal((n0, model.dim))
    x1 = model.center1 + model.sigma * rng.standard_normal((n1, model.dim))
    vectors = np.vstack([x0, x1])
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    order = rng.permutation(n)
    return Collection(vectors[order], labels[order])


def generate_labeled_set(
    model: SyntheticModel,
    n_per_class: int,
    rng: np.random.Generator | None = None,
) -> LabeledSet:
    """Draw a shuffled balanced labeled sample, n_per_class from each cluster."""
    if n_per_class < 1:
        raise InvalidParameterError("n_per_class must be >= 1")
    rng = make_rng(rng if rng is not None else model.seed)
    x0 = model.center0 + model.sigma * rng.standard_normal((n_per_class, model.dim))
    x1 = model.center1 + model.sigma * rng.standard_normal((n_per_class, model.dim))
    vectors = np.vstack([x0, x1])
    labels = np.concatenate(
        [np.zeros(n_per_class, dtype=np.int64), np.ones(n_per_class, dtype=np.int64)]
    )
    order = rng.permutation(2 * n_per_class)
    return LabeledSet(vectors[order], labels[order])


def expected_gamma(
    model: SyntheticModel,
    n_mc: int = 1000,
    rng: np.random.Generator | None = None,
    metric: object = DEFAULT_METRIC,
) -> float:
    """Monte-Carlo estimate of the model's separation margin.

    Draws a fresh balanced sample of n_mc points per cluster and measures how
    much same-cluster pairs beat cross-cluster pairs on average.
    """
    if n_mc < 100:
        raise InvalidParameterError("n_mc must be >= 100 for a stable estimate")
    sample = generate_labeled_set(model, n_per_class=n_mc, rng=rng)
    return estimate_gamma(sample, metric).gamma


def gamma_profile(
    model: SyntheticModel,
    n_mc: int = 1000,
    rng: np.random.Generator | None = None,
    metric: object = DEFAULT_METRIC,
) -> GammaEstimate:
    """Full separation statistics of the model, not just the margin."""
    if n_mc < 100:
        raise InvalidParameterError("n_mc must be >= 100 for a stable estimate")
    sample = generate_labeled_set(model, n_per_class=n_mc, rng=rng)
    return estimate_gamma(sample, metric)
