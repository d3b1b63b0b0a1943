"""Request and response schemas for the audit service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

Method = Literal["divscore", "iid", "ss-st"]
ControlMode = Literal["random-balanced", "random-proportional", "adaptive"]


class ControlPayload(BaseModel):
    t0: list[list[float]]
    t1: list[list[float]]


class NormStatsModel(BaseModel):
    cross: float
    within0: float
    within1: float


class ReportModel(BaseModel):
    estimate: float
    method: str
    raw_gap: float | None = None
    norm_stats: NormStatsModel | None = None
    diagnostics: dict[str, float] = Field(default_factory=dict)


class AuditRequest(BaseModel):
    collection: list[list[float]]
    control: ControlPayload
    method: Method = "divscore"
    metric: str = "cosine1"
    k: int = 5
    clip: bool = False
    norm_floor: float = 1e-6


class BuildControlRequest(BaseModel):
    vectors: list[list[float]]
    labels: list[int]
    mode: ControlMode = "random-balanced"
    size: int
    alpha: float = 1.0
    seed: int = 0
    metric: str = "cosine1"


class BuildControlResponse(BaseModel):
    t0: list[list[float]]
    t1: list[list[float]]


class SynthRequest(BaseModel):
    dim: int
    angle_degrees: float = 90.0
    sigma: float
    n: int
    f: float
    seed: int = 0


class SynthResponse(BaseModel):
    vectors: list[list[float]]
    labels: list[int]


class BoundsRequest(BaseModel):
    collection_size: int
    control_size: int
    mu_diff: float
    gamma: float
    mu_same: float | None = None
    delta: float | None = None
    log_base: float | None = None


class BoundsResponse(BaseModel):
    delta: float
    additive_error: float
    success_probability: float
    gap_probability: float
    gap_probability_raw: float


class PoolPayload(BaseModel):
    vectors: list[list[float]]
    labels: list[int]


class SyntheticSourceModel(BaseModel):
    dim: int
    angle_degrees: float = 90.0
    sigma: float


class SweepRequest(BaseModel):
    kind: Literal["f", "control-size"] = "f"
    source: SyntheticSourceModel | None = None
    pool: PoolPayload | None = None
    sweep: list[float]
    sizes: list[int] | None = None
    collection_size: int = 500
    control_size: int = 50
    repetitions: int = 100
    seed: int = 0
    methods: list[str] = Field(default_factory=lambda: ["divscore-random-balanced"])
    alpha: float = 1.0
    k: int = 5
    aux_size: int = 200
    holdout_size: int = 200
    metric: str = "cosine1"
    norm_floor: float = 1e-6


class SweepResponse(BaseModel):
    results_csv: str
    timings_csv: str
    manifest: dict


class HealthResponse(BaseModel):
    status: str
    version: str
