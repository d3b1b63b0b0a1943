"""Greedy control-set selection and its separation scores."""

from __future__ import annotations

import numpy as np
import pytest

from divaudit import (
    AdaptiveConfig,
    AuxiliarySet,
    ControlSet,
    CosinePlusOne,
    LabeledSet,
    build_adaptive_control,
    gamma_of_control,
    generate_labeled_set,
    model_from_angle,
    per_element_gamma,
)
from divaudit.errors import (
    EmptySetError,
    InfeasibleConfigError,
    InsufficientClassExamplesError,
    InvalidParameterError,
)

METRIC = CosinePlusOne()


def brute_per_element_gamma(u0: np.ndarray, u1: np.ndarray) -> tuple[list[float], list[float]]:
    out: list[list[float]] = []
    for own, other in ((u0, u1), (u1, u0)):
        scores = []
        for i in range(len(own)):
            same = sum(METRIC(own[i], own[j]) for j in range(len(own)) if j != i)
            cross = sum(METRIC(own[i], y) for y in other)
            scores.append(same / (len(own) - 1) - cross / len(other))
        out.append(scores)
    return out[0], out[1]


def brute_greedy(own: np.ndarray, scores: np.ndarray, half: int, alpha: float) -> list[int]:
    picked: list[int] = []
    for _ in range(half):
        best_idx = -1
        best_val = -np.inf
        for i in range(len(own)):
            if i in picked:
                continue
            redundancy = max((METRIC(own[i], own[j]) for j in picked), default=0.0)
            val = scores[i] - alpha * redundancy
            if val > best_val:
                best_val = val
                best_idx = i
        picked.append(best_idx)
    return picked


class TestPerElementGamma:
    def test_point_mass_orthogonal(self) -> None:
        u = AuxiliarySet(u0=[[1.0, 0.0]] * 3, u1=[[0.0, 1.0]] * 3)
        g0, g1 = per_element_gamma(u)
        np.testing.assert_allclose(g0, 1.0, atol=1e-12)
        np.testing.assert_allclose(g1, 1.0, atol=1e-12)

    def test_against_brute_force(self) -> None:
        rng = np.random.default_rng(31)
        u0 = rng.normal(size=(7, 4)) + np.array([1.0, 0, 0, 0])
        u1 = rng.normal(size=(5, 4)) + np.array([0, 1.0, 0, 0])
        g0, g1 = per_element_gamma(AuxiliarySet(u0=u0, u1=u1))
        b0, b1 = brute_per_element_gamma(u0, u1)
        np.testing.assert_allclose(g0, b0, atol=1e-12)
        np.testing.assert_allclose(g1, b1, atol=1e-12)

    def test_pool_validation(self) -> None:
        with pytest.raises(InsufficientClassExamplesError):
            AuxiliarySet(u0=[[1.0, 0.0]], u1=[[0.0, 1.0], [0.0, 2.0]])


class TestBuildAdaptiveControl:
    def test_matches_brute_force_greedy(self) -> None:
        rng = np.random.default_rng(32)
        u0 = rng.normal(size=(12, 3)) + np.array([2.0, 0, 0])
        u1 = rng.normal(size=(11, 3)) + np.array([0, 2.0, 0])
        u = AuxiliarySet(u0=u0, u1=u1)
        for alpha in (0.0, 0.3, 1.0, 5.0):
            control = build_adaptive_control(u, AdaptiveConfig(size=8, alpha=alpha))
            g0, g1 = per_element_gamma(u)
            expect0 = brute_greedy(u0, np.asarray(g0), 4, alpha)
            expect1 = brute_greedy(u1, np.asarray(g1), 4, alpha)
            np.testing.assert_array_equal(control.t0, u0[expect0])
            np.testing.assert_array_equal(control.t1, u1[expect1])

    def test_alpha_zero_is_stable_sorted_top_half(self) -> None:
        rng = np.random.default_rng(33)
        u0 = rng.normal(size=(10, 3)) + np.array([2.0, 0, 0])
        u1 = rng.normal(size=(10, 3)) + np.array([0, 2.0, 0])
        u = AuxiliarySet(u0=u0, u1=u1)
        control = build_adaptive_control(u, AdaptiveConfig(size=6, alpha=0.0))
        g0, _ = per_element_gamma(u)
        order = np.argsort(-np.asarray(g0), kind="stable")[:3]
        np.testing.assert_array_equal(control.t0, u0[order])

    def test_redundancy_penalty_skips_duplicates(self) -> None:
        # The best-scoring element appears twice; with a strong penalty the
        # second pick must be something else.
        u0 = np.array([[1.0, 0.05], [1.0, 0.05], [0.9, 0.25], [0.8, 0.3]])
        u1 = np.array([[0.05, 1.0], [-0.1, 1.0], [0.2, 0.9], [0.05, 1.1]])
        u = AuxiliarySet(u0=u0, u1=u1)
        greedy = build_adaptive_control(u, AdaptiveConfig(size=4, alpha=10.0))
        assert not np.array_equal(greedy.t0[1], u0[1])
        plain = build_adaptive_control(u, AdaptiveConfig(size=4, alpha=0.0))
        np.testing.assert_array_equal(plain.t0, u0[[0, 1]])

    def test_tie_break_lowest_index(self) -> None:
        u0 = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
        u1 = np.array([[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]])
        control = build_adaptive_control(
            AuxiliarySet(u0=u0, u1=u1), AdaptiveConfig(size=2, alpha=1.0)
        )
        np.testing.assert_array_equal(control.t0, u0[[0]])
        np.testing.assert_array_equal(control.t1, u1[[0]])

    def test_exhaustion_takes_whole_pool(self) -> None:
        rng = np.random.default_rng(34)
        u0 = rng.normal(size=(4, 3)) + 1
        u1 = rng.normal(size=(4, 3)) - 1
        control = build_adaptive_control(
            AuxiliarySet(u0=u0, u1=u1), AdaptiveConfig(size=8)
        )
        assert sorted(map(tuple, control.t0)) == sorted(map(tuple, u0))
        assert sorted(map(tuple, control.t1)) == sorted(map(tuple, u1))

    def test_infeasible_size(self) -> None:
        u = AuxiliarySet(u0=np.eye(3) + 1, u1=-np.eye(3) - 1)
        with pytest.raises(InfeasibleConfigError):
            build_adaptive_control(u, AdaptiveConfig(size=8))

    def test_config_validation(self) -> None:
        with pytest.raises(InvalidParameterError):
            AdaptiveConfig(size=5)
        with pytest.raises(InvalidParameterError):
            AdaptiveConfig(size=4, alpha=-0.5)

    def test_deterministic(self) -> None:
        model = model_from_angle(8, 90.0, 0.5)
        aux = generate_labeled_set(model, 30, np.random.default_rng(35))
        u = AuxiliarySet.from_labeled(aux)
        a = build_adaptive_control(u, AdaptiveConfig(size=10))
        b = build_adaptive_control(u, AdaptiveConfig(size=10))
        np.testing.assert_array_equal(a.t0, b.t0)
        np.testing.assert_array_equal(a.t1, b.t1)


class TestGammaOfControl:
    def test_point_mass(self) -> None:
        t = ControlSet(t0=[[1.0, 0.0]] * 2, t1=[[0.0, 1.0]] * 2)
        holdout = LabeledSet([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [0, 0, 1])
        assert gamma_of_control(t, holdout) == pytest.approx(1.0, abs=1e-12)

    def test_identical_partitions_measure_zero(self) -> None:
        rng = np.random.default_rng(36)
        rows = rng.normal(size=(4, 3))
        t = ControlSet(t0=rows, t1=rows.copy())
        holdout = LabeledSet(rng.normal(size=(10, 3)), [0, 1] * 5)
        assert gamma_of_control(t, holdout) == pytest.approx(0.0, abs=1e-12)

    def test_against_brute_force(self) -> None:
        rng = np.random.default_rng(37)
        t = ControlSet(t0=rng.normal(size=(3, 4)) + 1, t1=rng.normal(size=(4, 4)) - 1)
        vectors = rng.normal(size=(9, 4))
        labels = np.array([0, 0, 0, 0, 1, 1, 1, 1, 1])
        holdout = LabeledSet(vectors, labels)
        h0 = vectors[:4]
        h1 = vectors[4:]

        def pair_mean(a: np.ndarray, b: np.ndarray) -> float:
            return sum(METRIC(x, y) for x in a for y in b) / (len(a) * len(b))

        expected = 0.5 * (
            (pair_mean(h0, t.t0) - pair_mean(h1, t.t0))
            + (pair_mean(h1, t.t1) - pair_mean(h0, t.t1))
        )
        assert gamma_of_control(t, holdout) == pytest.approx(expected, abs=1e-12)

    def test_validation(self) -> None:
        t = ControlSet(t0=[[1.0, 0.0]], t1=np.empty((0, 2)))
        holdout = LabeledSet([[1.0, 0.0], [0.0, 1.0]], [0, 1])
        with pytest.raises(EmptySetError):
            gamma_of_control(t, holdout)
        full = ControlSet(t0=[[1.0, 0.0]], t1=[[0.0, 1.0]])
        with pytest.raises(InsufficientClassExamplesError):
            gamma_of_control(full, LabeledSet([[1.0, 0.0]], [0]))
