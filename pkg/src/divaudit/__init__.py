"""Disparity auditing for unlabeled vector collections.

The library estimates how unevenly two protected groups are represented in a
collection of feature vectors, using only a small labeled control set and a
similarity metric.  It also ships the samplers, baselines, bound calculators,
synthetic data generator, and sweep harness used to evaluate the estimator.
"""

from .adaptive import (
    AdaptiveConfig,
    AuxiliarySet,
    build_adaptive_control,
    gamma_of_control,
    per_element_gamma,
)
from .baselines import (
    SamplerConfig,
    iid_measure,
    sample_random_balanced,
    sample_random_proportional,
    ss_st,
)
from .bounds import (
    BoundInputs,
    ErrorBound,
    GapProbability,
    audit_error_bound,
    gap_success_probability,
)
from .core import (
    Collection,
    ControlSet,
    CosinePlusOne,
    GammaEstimate,
    LabeledSet,
    estimate_gamma,
    get_metric,
    make_rng,
    mean_sim_set_to_set,
    mean_sim_to_set,
    true_disparity,
)
from .harness import (
    CellStats,
    ExperimentConfig,
    SweepResult,
    SyntheticSource,
    control_size_sweep,
    run_sweep,
)
from .io import (
    FeatureFile,
    load_feature_file,
    save_collection,
    save_feature_file,
    save_labeled_set,
)
from .score import (
    DisparityReport,
    NormStats,
    apply_update,
    divscore,
    incremental_update,
    norm_stats,
)
from .synthgen import (
    SyntheticModel,
    expected_gamma,
    gamma_profile,
    generate_collection,
    generate_labeled_set,
    model_from_angle,
)

__all__ = [
    "AdaptiveConfig",
    "AuxiliarySet",
    "BoundInputs",
    "CellStats",
    "Collection",
    "ControlSet",
    "CosinePlusOne",
    "DisparityReport",
    "ErrorBound",
    "ExperimentConfig",
    "FeatureFile",
    "GammaEstimate",
    "GapProbability",
    "LabeledSet",
    "NormStats",
    "SamplerConfig",
    "SweepResult",
    "SyntheticModel",
    "SyntheticSource",
    "apply_update",
    "audit_error_bound",
    "build_adaptive_control",
    "control_size_sweep",
    "divscore",
    "estimate_gamma",
    "expected_gamma",
    "gamma_of_control",
    "gamma_profile",
    "gap_success_probability",
    "generate_collection",
    "generate_labeled_set",
    "get_metric",
    "incremental_update",
    "iid_measure",
    "load_feature_file",
    "make_rng",
    "mean_sim_set_to_set",
    "mean_sim_to_set",
    "model_from_angle",
    "norm_stats",
    "per_element_gamma",
    "run_sweep",
    "sample_random_balanced",
    "sample_random_proportional",
    "save_collection",
    "save_feature_file",
    "save_labeled_set",
    "ss_st",
    "true_disparity",
]
