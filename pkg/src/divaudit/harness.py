"""Repeatable sweep experiments over collection composition and control size.

A sweep runs several estimation pipelines over a grid of group-0 fractions
(or control sizes), repeats each cell under derived seeds, and aggregates
mean, spread, and error statistics per cell.  Results are emitted as a long
format CSV with one row per (f, m, method, statistic) plus a JSON manifest.

Seed derivation is a fixed counter scheme: every random draw uses a
generator seeded with (master_seed, repetition, stream_code, indices...),
so adding repetitions or grid points never perturbs existing cells, and the
data never depends on which methods are enabled.  Wall-clock timings are
kept out of results.csv so reruns of the same config are byte-identical;
they live in a separate timings table.
"""

from __future__ import annotations

import io as _io
import json
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .adaptive import AdaptiveConfig, AuxiliarySet, build_adaptive_control, gamma_of_control
from .baselines import SamplerConfig, iid_measure, sample_random_balanced, sample_random_proportional, ss_st
from .core import (
    Collection,
    ControlSet,
    LabeledSet,
    estimate_gamma,
    get_metric,
    true_disparity,
)
from .errors import (
    AuditError,
    InfeasibleConfigError,
    InsufficientExamplesError,
    InvalidParameterError,
)
from .score import DEFAULT_NORM_FLOOR, divscore, norm_stats
from .synthgen import SyntheticModel, generate_collection, generate_labeled_set, model_from_angle, round_half_up

METHOD_TAGS = (
    "divscore-random-balanced",
    "divscore-random-proportional",
    "divscore-adaptive",
    "iid-measure",
    "ss-st",
)

# Stream codes for the seed counter scheme.
_SPLIT, _AUX, _HOLDOUT, _BALANCED, _COLLECTION, _PROPORTIONAL = range(6)

_STATISTICS = (
    "mean_estimate",
    "std_error",
    "mean_true_disparity",
    "mean_abs_error",
    "mean_gamma_hat",
    "mean_gamma_control",
    "repetitions",
    "failures",
    "single_repetition",
)


@dataclass(frozen=True)
class SyntheticSource:
    """Synthetic data source: two unit centers at a given angle plus noise."""

    dim: int
    angle_degrees: float
    sigma: float

    def model(self) -> SyntheticModel:
        return model_from_angle(self.dim, self.angle_degrees, self.sigma)


@dataclass
class ExperimentConfig:
    """Everything one sweep needs.

    source: a SyntheticSource, or a fully labeled pool that is re-split into
        auxiliary and evaluation parts every repetition.
    sweep: grid of group-0 fractions.
    methods: which pipelines to run; see METHOD_TAGS.
    """

    source: SyntheticSource | LabeledSet
    sweep: Sequence[float]
    collection_size: int = 500
    control_size: int = 50
    repetitions: int = 100
    seed: int = 0
    methods: Sequence[str] = ("divscore-random-balanced",)
    alpha: float = 1.0
    k: int = 5
    aux_size: int = 200
    holdout_size: int = 200
    metric: str = "cosine1"
    norm_floor: float = DEFAULT_NORM_FLOOR

    def __post_init__(self) -> None:
        if not self.sweep:
            raise InvalidParameterError("sweep grid must be nonempty")
        for f in self.sweep:
            if not 0.0 <= float(f) <= 1.0:
                raise InvalidParameterError(f"sweep fraction {f} outside [0, 1]")
        if self.repetitions < 1:
            raise InvalidParameterError("repetitions must be >= 1")
        if self.seed < 0:
            raise InvalidParameterError("seed must be nonnegative")
        if self.collection_size < 1:
            raise InvalidParameterError("collection_size must be >= 1")
        if self.control_size < 2 or self.control_size % 2 != 0:
            raise InvalidParameterError("control_size must be an even integer >= 2")
        if self.aux_size < 4 or self.aux_size % 2 != 0:
            raise InvalidParameterError("aux_size must be an even integer >= 4")
        if self.holdout_size < 2 or self.holdout_size % 2 != 0:
            raise InvalidParameterError("holdout_size must be an even integer >= 2")
        if self.k < 1:
            raise InvalidParameterError("k must be >= 1")
        if not self.methods:
            raise InvalidParameterError("methods must be nonempty")
        for tag in self.methods:
            if tag not in METHOD_TAGS:
                raise InvalidParameterError(
                    f"unknown method {tag!r}; known: {list(METHOD_TAGS)}"
                )


@dataclass
class CellStats:
    """Aggregates for one (f, m, method) cell."""

    f: float
    m: int
    method: str
    repetitions: int
    failures: int
    mean_estimate: float
    std_error: float
    mean_true_disparity: float
    mean_abs_error: float
    mean_gamma_hat: float
    mean_gamma_control: float
    mean_wall_time: float
    total_wall_time: float
    single_repetition: bool
    error_counts: dict[str, int] = field(default_factory=dict)


@dataclass
class SweepResult:
    """All cells of a sweep plus the manifest needed to reproduce it."""

    cells: list[CellStats]
    manifest: dict

    def cell(self, f: float, method: str, m: int | None = None) -> CellStats:
        for c in self.cells:
            if c.f == f and c.method == method and (m is None or c.m == m):
                return c
        raise KeyError(f"no cell for f={f} m={m} method={method}")

    def results_csv(self) -> str:
        """Deterministic long-format table: one row per (f, m, method, statistic)."""
        out = _io.StringIO()
        out.write("f,m,method,statistic,value\n")
        for c in sorted(self.cells, key=lambda c: (c.f, c.m, c.method)):
            values = {
                "mean_estimate": c.mean_estimate,
                "std_error": c.std_error,
                "mean_true_disparity": c.mean_true_disparity,
                "mean_abs_error": c.mean_abs_error,
                "mean_gamma_hat": c.mean_gamma_hat,
                "mean_gamma_control": c.mean_gamma_control,
                "repetitions": float(c.repetitions),
                "failures": float(c.failures),
                "single_repetition": 1.0 if c.single_repetition else 0.0,
            }
            for statistic in _STATISTICS:
                out.write(
                    f"{c.f!r},{c.m},{c.method},{statistic},{values[statistic]!r}\n"
                )
        return out.getvalue()

    def timings_csv(self) -> str:
        """Wall-clock table, separate because timings differ between reruns."""
        out = _io.StringIO()
        out.write("f,m,method,mean_wall_time_s,total_wall_time_s\n")
        for c in sorted(self.cells, key=lambda c: (c.f, c.m, c.method)):
            out.write(
                f"{c.f!r},{c.m},{c.method},{c.mean_wall_time!r},{c.total_wall_time!r}\n"
            )
        return out.getvalue()

    def manifest_json(self) -> str:
        return json.dumps(self.manifest, sort_keys=True, indent=2)


class _CellAccumulator:
    def __init__(self) -> None:
        self.estimates: list[float] = []
        self.true_ds: list[float] = []
        self.gamma_hats: list[float] = []
        self.gamma_controls: list[float] = []
        self.wall_times: list[float] = []
        self.error_counts: dict[str, int] = {}

    def record(
        self,
        estimate: float,
        true_d: float,
        gamma_hat: float,
        gamma_control: float,
        wall_time: float,
    ) -> None:
        self.estimates.append(estimate)
        self.true_ds.append(true_d)
        self.gamma_hats.append(gamma_hat)
        self.gamma_controls.append(gamma_control)
        self.wall_times.append(wall_time)

    def fail(self, error: AuditError) -> None:
        tag = type(error).__name__
        self.error_counts[tag] = self.error_counts.get(tag, 0) + 1

    def stats(self, f: float, m: int, method: str) -> CellStats:
        ok = len(self.estimates)
        failures = sum(self.error_counts.values())
        est = np.asarray(self.estimates)
        true_d = np.asarray(self.true_ds)
        if ok == 0:
            mean_estimate = std_error = mean_true = mean_abs = float("nan")
        else:
            mean_estimate = float(est.mean())
            mean_true = float(true_d.mean())
            mean_abs = float(np.abs(est - true_d).mean())
            std_error = (
                float(est.std(ddof=1) / np.sqrt(ok)) if ok >= 2 else 0.0
            )
        return CellStats(
            f=f,
            m=m,
            method=method,
            repetitions=ok,
            failures=failures,
            mean_estimate=mean_estimate,
            std_error=std_error,
            mean_true_disparity=mean_true,
            mean_abs_error=mean_abs,
            mean_gamma_hat=_nanmean(self.gamma_hats),
            mean_gamma_control=_nanmean(self.gamma_controls),
            mean_wall_time=_nanmean(self.wall_times),
            total_wall_time=float(np.sum(self.wall_times)) if self.wall_times else 0.0,
            single_repetition=ok == 1,
            error_counts=dict(sorted(self.error_counts.items())),
        )


def _nanmean(values: list[float]) -> float:
    arr = np.asarray([v for v in values if not np.isnan(v)])
    return float(arr.mean()) if arr.size else float("nan")


def _stream(master: int, rep: int, code: int, *subs: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master, rep, code, *subs]))


class _Repetition:
    """Per-repetition data: auxiliary pool, holdout, and an evaluation pool."""

    def __init__(self, cfg: ExperimentConfig, rep: int) -> None:
        self.cfg = cfg
        self.rep = rep
        if isinstance(cfg.source, SyntheticSource):
            model = cfg.source.model()
            self.model: SyntheticModel | None = model
            self.aux = generate_labeled_set(
                model, cfg.aux_size // 2, _stream(cfg.seed, rep, _AUX)
            )
            self.holdout = generate_labeled_set(
                model, cfg.holdout_size // 2, _stream(cfg.seed, rep, _HOLDOUT)
            )
            self.eval_pool: LabeledSet | None = None
        else:
            pool = cfg.source
            self.model = None
            need = cfg.aux_size + cfg.holdout_size
            if len(pool) < need:
                raise InsufficientExamplesError(
                    f"pool of {len(pool)} cannot supply aux={cfg.aux_size} "
                    f"plus holdout={cfg.holdout_size}"
                )
            perm = _stream(cfg.seed, rep, _SPLIT).permutation(len(pool))
            aux_idx = perm[: cfg.aux_size]
            rest = perm[cfg.aux_size :]
            self.aux = LabeledSet(pool.vectors[aux_idx], pool.labels[aux_idx])
            holdout_idx = rest[: cfg.holdout_size]
            self.holdout = LabeledSet(
                pool.vectors[holdout_idx], pool.labels[holdout_idx]
            )
            self.eval_pool = LabeledSet(pool.vectors[rest], pool.labels[rest])
        self.gamma_hat = estimate_gamma(self.aux, get_metric(cfg.metric)).gamma

    def collection(self, f: float, f_idx: int) -> Collection:
        cfg = self.cfg
        rng = _stream(cfg.seed, self.rep, _COLLECTION, f_idx)
        if self.model is not None:
            return generate_collection(self.model, cfg.collection_size, f, rng)
        assert self.eval_pool is not None
        n = cfg.collection_size
        n0 = round_half_up(f * n)
        n1 = n - n0
        class0 = np.flatnonzero(self.eval_pool.labels == 0)
        class1 = np.flatnonzero(self.eval_pool.labels == 1)
        if class0.size < n0 or class1.size < n1:
            raise InsufficientExamplesError(
                f"evaluation pool has {class0.size}/{class1.size} per class, "
                f"need {n0}/{n1} for f={f}"
            )
        take0 = rng.choice(class0, size=n0, replace=False) if n0 else np.empty(0, dtype=np.int64)
        take1 = rng.choice(class1, size=n1, replace=False) if n1 else np.empty(0, dtype=np.int64)
        idx = np.concatenate([take0, take1]).astype(np.int64)
        idx = idx[rng.permutation(idx.size)]
        return Collection(self.eval_pool.vectors[idx], self.eval_pool.labels[idx])


def _build_balanced(
    rep_data: _Repetition, m: int, m_idx: int, metric: object
) -> tuple[ControlSet, float]:
    cfg = rep_data.cfg
    rng = _stream(cfg.seed, rep_data.rep, _BALANCED, m_idx)
    control = sample_random_balanced(rep_data.aux, SamplerConfig(size=m), rng)
    _cache_stats(control, metric)
    return control, _safe_gamma_of_control(control, rep_data.holdout, metric)


def _build_adaptive(
    rep_data: _Repetition, m: int, metric: object
) -> tuple[ControlSet, float]:
    cfg = rep_data.cfg
    control = build_adaptive_control(
        AuxiliarySet.from_labeled(rep_data.aux),
        AdaptiveConfig(size=m, alpha=cfg.alpha),
        metric,
    )
    _cache_stats(control, metric)
    return control, _safe_gamma_of_control(control, rep_data.holdout, metric)


def _cache_stats(control: ControlSet, metric: object) -> None:
    try:
        control.stats = norm_stats(control, metric)
    except AuditError:
        control.stats = None


def _safe_gamma_of_control(
    control: ControlSet, holdout: LabeledSet, metric: object
) -> float:
    try:
        return gamma_of_control(control, holdout, metric)
    except AuditError:
        return float("nan")


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Run every configured method over the f grid at the configured control size."""
    return _run(cfg, sizes=None)


def control_size_sweep(cfg: ExperimentConfig, sizes: Sequence[int]) -> SweepResult:
    """Run every configured method over a control-size grid at a fixed f.

    The fixed fraction is the first entry of cfg.sweep.
    """
    if not sizes:
        raise InvalidParameterError("sizes must be nonempty")
    for m in sizes:
        if m < 2 or m % 2 != 0:
            raise InvalidParameterError("every control size must be an even integer >= 2")
    return _run(cfg, sizes=[int(m) for m in sizes])


def _run(cfg: ExperimentConfig, sizes: list[int] | None) -> SweepResult:
    metric = get_metric(cfg.metric)
    f_grid = [float(f) for f in (cfg.sweep if sizes is None else cfg.sweep[:1])]
    m_grid = sizes if sizes is not None else [cfg.control_size]
    needs_balanced = bool(
        {"divscore-random-balanced", "ss-st"} & set(cfg.methods)
    )
    needs_adaptive = "divscore-adaptive" in cfg.methods
    needs_proportional = bool(
        {"divscore-random-proportional", "iid-measure"} & set(cfg.methods)
    )
    acc: dict[tuple[float, int, str], _CellAccumulator] = {
        (f, m, method): _CellAccumulator()
        for f in f_grid
        for m in m_grid
        for method in cfg.methods
    }

    for rep in range(cfg.repetitions):
        try:
            rep_data = _Repetition(cfg, rep)
        except AuditError as err:
            for key in acc:
                acc[key].fail(err)
            continue
        for m_idx, m in enumerate(m_grid):
            balanced: tuple[ControlSet, float] | AuditError | None = None
            adaptive: tuple[ControlSet, float] | AuditError | None = None
            if needs_balanced:
                try:
                    balanced = _build_balanced(rep_data, m, m_idx, metric)
                except AuditError as err:
                    balanced = err
            if needs_adaptive:
                try:
                    adaptive = _build_adaptive(rep_data, m, metric)
                except AuditError as err:
                    adaptive = err
            for f_idx, f in enumerate(f_grid):
                try:
                    collection = rep_data.collection(f, f_idx)
                    true_d = true_disparity(collection.hidden_labels)
                except AuditError as err:
                    for method in cfg.methods:
                        acc[(f, m, method)].fail(err)
                    continue
                proportional: tuple[ControlSet, float] | AuditError | None = None
                if needs_proportional:
                    try:
                        rng = _stream(cfg.seed, rep, _PROPORTIONAL, m_idx, f_idx)
                        control = sample_random_proportional(
                            LabeledSet(collection.vectors, collection.hidden_labels),
                            SamplerConfig(size=m),
                            rng,
                        )
                        proportional = (
                            control,
                            _safe_gamma_of_control(control, rep_data.holdout, metric),
                        )
                    except AuditError as err:
                        proportional = err
                for method in cfg.methods:
                    cell = acc[(f, m, method)]
                    try:
                        estimate, gamma_control, wall = _run_method(
                            method, collection, balanced, adaptive, proportional, cfg, metric
                        )
                    except AuditError as err:
                        cell.fail(err)
                        continue
                    cell.record(
                        estimate, true_d, rep_data.gamma_hat, gamma_control, wall
                    )

    cells = [
        acc[(f, m, method)].stats(f, m, method)
        for f in f_grid
        for m in m_grid
        for method in cfg.methods
    ]
    return SweepResult(cells=cells, manifest=_manifest(cfg, f_grid, m_grid, cells))


def _run_method(
    method: str,
    collection: Collection,
    balanced: tuple[ControlSet, float] | AuditError | None,
    adaptive: tuple[ControlSet, float] | AuditError | None,
    proportional: tuple[ControlSet, float] | AuditError | None,
    cfg: ExperimentConfig,
    metric: object,
) -> tuple[float, float, float]:
    """Run one pipeline; returns (estimate, control separation, wall seconds)."""

    def unwrap(entry, label):
        if entry is None:
            raise InfeasibleConfigError(f"{label} control set was not built")
        if isinstance(entry, AuditError):
            raise entry
        return entry

    if method == "divscore-random-balanced":
        control, gamma_control = unwrap(balanced, "balanced")
        start = time.perf_counter()
        report = divscore(collection, control, metric, norm_floor=cfg.norm_floor)
        return report.estimate, gamma_control, time.perf_counter() - start
    if method == "divscore-adaptive":
        control, gamma_control = unwrap(adaptive, "adaptive")
        start = time.perf_counter()
        report = divscore(collection, control, metric, norm_floor=cfg.norm_floor)
        return report.estimate, gamma_control, time.perf_counter() - start
    if method == "divscore-random-proportional":
        control, gamma_control = unwrap(proportional, "proportional")
        start = time.perf_counter()
        report = divscore(collection, control, metric, norm_floor=cfg.norm_floor)
        return report.estimate, gamma_control, time.perf_counter() - start
    if method == "iid-measure":
        control, gamma_control = unwrap(proportional, "proportional")
        start = time.perf_counter()
        report = iid_measure(control)
        return report.estimate, float("nan"), time.perf_counter() - start
    if method == "ss-st":
        control, gamma_control = unwrap(balanced, "balanced")
        start = time.perf_counter()
        report = ss_st(collection, control, metric, k=cfg.k)
        return report.estimate, gamma_control, time.perf_counter() - start
    raise InvalidParameterError(f"unknown method {method!r}")


def _manifest(
    cfg: ExperimentConfig,
    f_grid: list[float],
    m_grid: list[int],
    cells: list[CellStats],
) -> dict:
    if isinstance(cfg.source, SyntheticSource):
        source: dict = {
            "kind": "synthetic",
            "dim": cfg.source.dim,
            "angle_degrees": cfg.source.angle_degrees,
            "sigma": cfg.source.sigma,
        }
    else:
        source = {
            "kind": "pool",
            "size": len(cfg.source),
            "dim": cfg.source.dim,
            "class0": cfg.source.count(0),
            "class1": cfg.source.count(1),
        }
    errors = {
        f"f={cell.f!r}/m={cell.m}/{cell.method}": cell.error_counts
        for cell in cells
        if cell.error_counts
    }
    return {
        "source": source,
        "f_grid": f_grid,
        "control_sizes": m_grid,
        "collection_size": cfg.collection_size,
        "control_size": cfg.control_size,
        "repetitions": cfg.repetitions,
        "seed": cfg.seed,
        "methods": list(cfg.methods),
        "alpha": cfg.alpha,
        "k": cfg.k,
        "aux_size": cfg.aux_size,
        "holdout_size": cfg.holdout_size,
        "metric": cfg.metric,
        "norm_floor": cfg.norm_floor,
        "seed_scheme": (
            "generator PCG64; every draw seeded with "
            "(seed, repetition, stream, indices): streams split=0 aux=1 "
            "holdout=2 balanced=3 collection=4 proportional=5; grid draws are "
            "keyed by position, so appending grid points or repetitions never "
            "changes existing cells"
        ),
        "cell_errors": errors,
    }
