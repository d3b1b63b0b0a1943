"""FastAPI application wrapping the audit library.

The service is stateless: every request carries its own data, and identical
requests produce identical responses.  Library errors are returned as HTTP
422 with the exception class as an error tag.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..baselines import iid_measure, sample_random_balanced, sample_random_proportional, SamplerConfig, ss_st
from ..adaptive import AdaptiveConfig, AuxiliarySet, build_adaptive_control
from ..bounds import BoundInputs, GapProbability, audit_error_bound, gap_success_probability
from ..core import Collection, ControlSet, LabeledSet, get_metric
from ..errors import AuditError, InvalidParameterError
from ..harness import ExperimentConfig, SyntheticSource, control_size_sweep, run_sweep
from ..score import DisparityReport, divscore
from ..synthgen import generate_collection, model_from_angle
from . import models

import math


def _version() -> str:
    try:
        return version("divaudit")
    except PackageNotFoundError:
        return "unknown"


def _report_model(report: DisparityReport) -> models.ReportModel:
    stats = None
    if report.norm_stats is not None:
        stats = models.NormStatsModel(
            cross=report.norm_stats.cross,
            within0=report.norm_stats.within0,
            within1=report.norm_stats.within1,
        )
    return models.ReportModel(
        estimate=report.estimate,
        method=report.method,
        raw_gap=report.raw_gap,
        norm_stats=stats,
        diagnostics=report.diagnostics,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="divaudit", version=_version())

    @app.exception_handler(AuditError)
    async def audit_error_handler(_: Request, exc: AuditError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health", response_model=models.HealthResponse)
    def health() -> models.HealthResponse:
        return models.HealthResponse(status="ok", version=_version())

    @app.post("/audit", response_model=models.ReportModel)
    def audit(request: models.AuditRequest) -> models.ReportModel:
        metric = get_metric(request.metric)
        control = ControlSet(t0=request.control.t0, t1=request.control.t1)
        if request.method == "iid":
            return _report_model(iid_measure(control))
        collection = Collection(request.collection)
        if request.method == "divscore":
            report = divscore(
                collection,
                control,
                metric,
                norm_floor=request.norm_floor,
                clip=request.clip,
            )
        else:
            report = ss_st(collection, control, metric, k=request.k)
        return _report_model(report)

    @app.post("/control/build", response_model=models.BuildControlResponse)
    def build_control(request: models.BuildControlRequest) -> models.BuildControlResponse:
        metric = get_metric(request.metric)
        pool = LabeledSet(request.vectors, request.labels)
        if request.mode == "adaptive":
            control = build_adaptive_control(
                AuxiliarySet.from_labeled(pool),
                AdaptiveConfig(size=request.size, alpha=request.alpha),
                metric,
            )
        else:
            cfg = SamplerConfig(size=request.size, seed=request.seed)
            if request.mode == "random-balanced":
                control = sample_random_balanced(pool, cfg)
            else:
                control = sample_random_proportional(pool, cfg)
        return models.BuildControlResponse(
            t0=control.t0.tolist(), t1=control.t1.tolist()
        )

    @app.post("/synth", response_model=models.SynthResponse)
    def synth(request: models.SynthRequest) -> models.SynthResponse:
        model = model_from_angle(
            request.dim, request.angle_degrees, request.sigma, seed=request.seed
        )
        collection = generate_collection(model, request.n, request.f)
        assert collection.hidden_labels is not None
        return models.SynthResponse(
            vectors=collection.vectors.tolist(),
            labels=collection.hidden_labels.tolist(),
        )

    @app.post("/bounds", response_model=models.BoundsResponse)
    def bounds(request: models.BoundsRequest) -> models.BoundsResponse:
        inputs = BoundInputs(
            collection_size=request.collection_size,
            control_size=request.control_size,
            mu_diff=request.mu_diff,
            gamma=request.gamma,
            mu_same=request.mu_same,
            delta=request.delta,
        )
        log_base = request.log_base if request.log_base is not None else math.e
        bound = audit_error_bound(inputs, log_base=log_base)
        probe_delta = request.delta if request.delta is not None else bound.delta
        gap: GapProbability = gap_success_probability(
            BoundInputs(
                collection_size=request.collection_size,
                control_size=request.control_size,
                mu_diff=request.mu_diff,
                gamma=request.gamma,
                mu_same=request.mu_same,
                delta=probe_delta,
            )
        )
        return models.BoundsResponse(
            delta=bound.delta,
            additive_error=bound.additive_error,
            success_probability=bound.success_probability,
            gap_probability=gap.probability,
            gap_probability_raw=gap.raw,
        )

    @app.post("/sweep", response_model=models.SweepResponse)
    def sweep(request: models.SweepRequest) -> models.SweepResponse:
        if (request.source is None) == (request.pool is None):
            raise InvalidParameterError(
                "exactly one of source (synthetic) or pool (labeled data) is required"
            )
        if request.source is not None:
            source: SyntheticSource | LabeledSet = SyntheticSource(
                dim=request.source.dim,
                angle_degrees=request.source.angle_degrees,
                sigma=request.source.sigma,
            )
        else:
            assert request.pool is not None
            source = LabeledSet(request.pool.vectors, request.pool.labels)
        cfg = ExperimentConfig(
            source=source,
            sweep=request.sweep,
            collection_size=request.collection_size,
            control_size=request.control_size,
            repetitions=request.repetitions,
            seed=request.seed,
            methods=tuple(request.methods),
            alpha=request.alpha,
            k=request.k,
            aux_size=request.aux_size,
            holdout_size=request.holdout_size,
            metric=request.metric,
            norm_floor=request.norm_floor,
        )
        if request.kind == "control-size":
            if not request.sizes:
                raise InvalidParameterError("control-size sweeps need sizes")
            result = control_size_sweep(cfg, request.sizes)
        else:
            result = run_sweep(cfg)
        return models.SweepResponse(
            results_csv=result.results_csv(),
            timings_csv=result.timings_csv(),
            manifest=result.manifest,
        )

    return app
