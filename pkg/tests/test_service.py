"""HTTP service parity with the library."""

from __future__ import annotations

import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from divaudit import (
    BoundInputs,
    Collection,
    ControlSet,
    ExperimentConfig,
    SyntheticSource,
    audit_error_bound,
    divscore,
    gap_success_probability,
    generate_collection,
    iid_measure,
    model_from_angle,
    run_sweep,
    ss_st,
)
from divaudit.service import create_app


@pytest.fixture(scope="module")
def client() -> TestClient:
    return TestClient(create_app())


def example_payload(seed: int = 70) -> dict:
    rng = np.random.default_rng(seed)
    t0 = (rng.normal(size=(4, 5), scale=0.3) + np.eye(5)[0]).tolist()
    t1 = (rng.normal(size=(4, 5), scale=0.3) + np.eye(5)[1]).tolist()
    s = rng.normal(size=(20, 5), scale=0.5).tolist()
    return {"collection": s, "control": {"t0": t0, "t1": t1}}


class TestHealth:
    def test_ok(self, client: TestClient) -> None:
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["version"]


class TestAudit:
    def test_divscore_parity(self, client: TestClient) -> None:
        payload = example_payload()
        response = client.post("/audit", json=payload)
        assert response.status_code == 200
        body = response.json()
        local = divscore(
            Collection(payload["collection"]),
            ControlSet(t0=payload["control"]["t0"], t1=payload["control"]["t1"]),
        )
        # JSON serialization of finite floats round-trips exactly.
        assert body["estimate"] == local.estimate
        assert body["raw_gap"] == local.raw_gap
        assert body["method"] == "divscore"
        assert body["norm_stats"]["cross"] == local.norm_stats.cross
        assert body["diagnostics"]["gamma_hat"] == local.diagnostics["gamma_hat"]

    def test_iid_parity(self, client: TestClient) -> None:
        payload = example_payload() | {"method": "iid"}
        body = client.post("/audit", json=payload).json()
        local = iid_measure(
            ControlSet(t0=payload["control"]["t0"], t1=payload["control"]["t1"])
        )
        assert body["estimate"] == local.estimate == 0.0
        assert body["method"] == "iid"

    def test_ss_st_parity(self, client: TestClient) -> None:
        payload = example_payload() | {"method": "ss-st", "k": 3}
        body = client.post("/audit", json=payload).json()
        local = ss_st(
            Collection(payload["collection"]),
            ControlSet(t0=payload["control"]["t0"], t1=payload["control"]["t1"]),
            k=3,
        )
        assert body["estimate"] == local.estimate
        assert body["diagnostics"]["iterations"] == local.diagnostics["iterations"]

    def test_clip_flag(self, client: TestClient) -> None:
        payload = example_payload() | {"clip": True}
        body = client.post("/audit", json=payload).json()
        assert -1.0 <= body["estimate"] <= 1.0

    def test_audit_error_tag(self, client: TestClient) -> None:
        payload = example_payload()
        payload["control"]["t1"] = payload["control"]["t0"]
        del payload["control"]["t0"]
        payload["control"]["t0"] = []
        response = client.post("/audit", json=payload)
        assert response.status_code == 422
        body = response.json()
        assert body["error"] == "GroupTooSmallError"
        assert body["detail"]

    def test_degenerate_tag(self, client: TestClient) -> None:
        control = {"t0": [[1.0, 0.0], [2.0, 0.0]], "t1": [[3.0, 0.0], [0.5, 0.0]]}
        response = client.post(
            "/audit", json={"collection": [[1.0, 1.0]], "control": control}
        )
        assert response.status_code == 422
        assert response.json()["error"] == "DegenerateNormalizationError"

    def test_unknown_metric(self, client: TestClient) -> None:
        payload = example_payload() | {"metric": "nope"}
        response = client.post("/audit", json=payload)
        assert response.status_code == 422
        assert response.json()["error"] == "InvalidParameterError"

    def test_schema_violation(self, client: TestClient) -> None:
        response = client.post("/audit", json={"collection": [[1.0]]})
        assert response.status_code == 422


class TestBuildControl:
    def pool(self) -> dict:
        rng = np.random.default_rng(71)
        v0 = rng.normal(size=(10, 3), scale=0.3) + np.array([1.0, 0, 0])
        v1 = rng.normal(size=(10, 3), scale=0.3) + np.array([0, 1.0, 0])
        return {
            "vectors": np.vstack([v0, v1]).tolist(),
            "labels": [0] * 10 + [1] * 10,
        }

    def test_random_balanced(self, client: TestClient) -> None:
        body = client.post(
            "/control/build", json=self.pool() | {"mode": "random-balanced", "size": 6, "seed": 5}
        ).json()
        assert len(body["t0"]) == 3 and len(body["t1"]) == 3
        again = client.post(
            "/control/build", json=self.pool() | {"mode": "random-balanced", "size": 6, "seed": 5}
        ).json()
        assert body == again

    def test_random_proportional(self, client: TestClient) -> None:
        body = client.post(
            "/control/build", json=self.pool() | {"mode": "random-proportional", "size": 8}
        ).json()
        assert len(body["t0"]) + len(body["t1"]) == 8

    def test_adaptive_deterministic(self, client: TestClient) -> None:
        a = client.post(
            "/control/build", json=self.pool() | {"mode": "adaptive", "size": 6, "alpha": 0.5}
        ).json()
        b = client.post(
            "/control/build", json=self.pool() | {"mode": "adaptive", "size": 6, "alpha": 0.5}
        ).json()
        assert a == b
        assert len(a["t0"]) == 3

    def test_infeasible(self, client: TestClient) -> None:
        response = client.post(
            "/control/build", json=self.pool() | {"mode": "adaptive", "size": 30}
        )
        assert response.status_code == 422
        assert response.json()["error"] == "InfeasibleConfigError"


class TestSynth:
    def test_matches_library(self, client: TestClient) -> None:
        body = client.post(
            "/synth", json={"dim": 6, "sigma": 0.2, "n": 30, "f": 0.4, "seed": 12}
        ).json()
        model = model_from_angle(6, 90.0, 0.2, seed=12)
        local = generate_collection(model, 30, 0.4)
        assert body["vectors"] == local.vectors.tolist()
        assert body["labels"] == local.hidden_labels.tolist()

    def test_invalid_fraction(self, client: TestClient) -> None:
        response = client.post(
            "/synth", json={"dim": 6, "sigma": 0.2, "n": 30, "f": 1.4}
        )
        assert response.status_code == 422


class TestBounds:
    def test_parity(self, client: TestClient) -> None:
        request = {
            "collection_size": 500,
            "control_size": 50,
            "mu_diff": 1.0,
            "gamma": 0.35,
        }
        body = client.post("/bounds", json=request).json()
        inputs = BoundInputs(
            collection_size=500, control_size=50, mu_diff=1.0, gamma=0.35
        )
        bound = audit_error_bound(inputs)
        assert body["delta"] == bound.delta
        assert body["additive_error"] == bound.additive_error
        assert body["success_probability"] == bound.success_probability
        gap = gap_success_probability(
            BoundInputs(
                collection_size=500,
                control_size=50,
                mu_diff=1.0,
                gamma=0.35,
                delta=bound.delta,
            )
        )
        assert body["gap_probability"] == gap.probability
        assert body["gap_probability_raw"] == gap.raw

    def test_log_base(self, client: TestClient) -> None:
        request = {
            "collection_size": 200,
            "control_size": 20,
            "mu_diff": 0.8,
            "gamma": 0.3,
            "log_base": 10.0,
        }
        body = client.post("/bounds", json=request).json()
        bound = audit_error_bound(
            BoundInputs(collection_size=200, control_size=20, mu_diff=0.8, gamma=0.3),
            log_base=10.0,
        )
        assert body["delta"] == bound.delta

    def test_explicit_delta(self, client: TestClient) -> None:
        request = {
            "collection_size": 100,
            "control_size": 10,
            "mu_diff": 1.0,
            "gamma": 0.4,
            "delta": 0.0,
        }
        body = client.post("/bounds", json=request).json()
        assert body["gap_probability"] == 0.0
        assert body["gap_probability_raw"] == -3.0

    def test_invalid(self, client: TestClient) -> None:
        response = client.post(
            "/bounds",
            json={"collection_size": 10, "control_size": 5, "mu_diff": 0.0, "gamma": 0.1},
        )
        assert response.status_code == 422
        assert response.json()["error"] == "InvalidParameterError"


class TestSweep:
    def request_body(self) -> dict:
        return {
            "source": {"dim": 8, "sigma": 0.3},
            "sweep": [0.2, 0.8],
            "collection_size": 40,
            "control_size": 10,
            "repetitions": 3,
            "seed": 11,
            "methods": ["divscore-random-balanced"],
            "aux_size": 40,
            "holdout_size": 20,
        }

    def test_matches_local_run(self, client: TestClient) -> None:
        body = client.post("/sweep", json=self.request_body()).json()
        cfg = ExperimentConfig(
            source=SyntheticSource(dim=8, angle_degrees=90.0, sigma=0.3),
            sweep=[0.2, 0.8],
            collection_size=40,
            control_size=10,
            repetitions=3,
            seed=11,
            methods=("divscore-random-balanced",),
            aux_size=40,
            holdout_size=20,
        )
        local = run_sweep(cfg)
        assert body["results_csv"] == local.results_csv()
        assert body["manifest"]["seed"] == 11

    def test_control_size_kind(self, client: TestClient) -> None:
        request = self.request_body() | {
            "kind": "control-size",
            "sweep": [0.3],
            "sizes": [4, 8],
        }
        body = client.post("/sweep", json=request).json()
        assert ",4,divscore-random-balanced," in body["results_csv"]
        assert ",8,divscore-random-balanced," in body["results_csv"]

    def test_pool_source(self, client: TestClient) -> None:
        rng = np.random.default_rng(72)
        v0 = rng.normal(size=(40, 4), scale=0.4) + np.array([1.0, 0, 0, 0])
        v1 = rng.normal(size=(40, 4), scale=0.4) + np.array([0, 1.0, 0, 0])
        request = {
            "pool": {
                "vectors": np.vstack([v0, v1]).tolist(),
                "labels": [0] * 40 + [1] * 40,
            },
            "sweep": [0.5],
            "collection_size": 20,
            "control_size": 6,
            "repetitions": 2,
            "seed": 2,
            "methods": ["divscore-random-balanced"],
            "aux_size": 20,
            "holdout_size": 10,
        }
        body = client.post("/sweep", json=request).json()
        assert body["manifest"]["source"]["kind"] == "pool"

    def test_requires_exactly_one_source(self, client: TestClient) -> None:
        request = self.request_body()
        del request["source"]
        response = client.post("/sweep", json=request)
        assert response.status_code == 422
        both = self.request_body() | {
            "pool": {"vectors": [[1.0, 0.0]], "labels": [0]}
        }
        assert client.post("/sweep", json=both).status_code == 422

    def test_control_size_kind_requires_sizes(self, client: TestClient) -> None:
        request = self.request_body() | {"kind": "control-size", "sweep": [0.3]}
        response = client.post("/sweep", json=request)
        assert response.status_code == 422
