"""Two-center Gaussian generator with ground-truth labels."""

from __future__ import annotations

import numpy as np
import pytest

from divaudit import (
    SyntheticModel,
    expected_gamma,
    gamma_profile,
    generate_collection,
    generate_labeled_set,
    model_from_angle,
    true_disparity,
)
from divaudit.errors import (
    DimensionMismatchError,
    InvalidParameterError,
    ZeroVectorError,
)
from divaudit.synthgen import round_half_up


class TestRoundHalfUp:
    @pytest.mark.parametrize(
        "x,expected",
        [(0.0, 0), (0.4, 0), (0.5, 1), (1.5, 2), (2.5, 3), (2.499, 2), (49.5, 50)],
    )
    def test_values(self, x: float, expected: int) -> None:
        assert round_half_up(x) == expected


class TestModelConstruction:
    def test_angle_geometry(self) -> None:
        model = model_from_angle(4, 90.0, 0.2)
        assert np.dot(model.center0, model.center1) == pytest.approx(0.0, abs=1e-12)
        assert np.linalg.norm(model.center0) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(model.center1) == pytest.approx(1.0, abs=1e-12)
        acute = model_from_angle(4, 45.0, 0.2)
        assert np.dot(acute.center0, acute.center1) == pytest.approx(
            np.cos(np.pi / 4), abs=1e-12
        )

    def test_validation(self) -> None:
        with pytest.raises(InvalidParameterError):
            model_from_angle(1, 90.0, 0.1)
        with pytest.raises(InvalidParameterError):
            SyntheticModel(center0=[1.0, 0.0], center1=[0.0, 1.0], sigma=-0.1)
        with pytest.raises(ZeroVectorError):
            SyntheticModel(center0=[0.0, 0.0], center1=[0.0, 1.0], sigma=0.1)
        with pytest.raises(DimensionMismatchError):
            SyntheticModel(center0=[1.0, 0.0], center1=[0.0, 1.0, 0.0], sigma=0.1)


class TestGenerateCollection:
    def test_group_counts_across_fraction_grid(self) -> None:
        model = model_from_angle(4, 90.0, 0.3)
        for i in range(11):
            f = i / 10
            s = generate_collection(model, 500, f, np.random.default_rng(i))
            assert len(s) == 500
            n0 = int(np.sum(s.hidden_labels == 0))
            assert n0 == round_half_up(f * 500) == i * 50
            assert true_disparity(s.hidden_labels) == pytest.approx(
                (2 * n0 - 500) / 500, abs=1e-15
            )

    def test_rounding_on_odd_sizes(self) -> None:
        model = model_from_angle(3, 90.0, 0.1)
        s = generate_collection(model, 7, 0.5, np.random.default_rng(0))
        assert int(np.sum(s.hidden_labels == 0)) == 4

    def test_bit_identical_per_seed(self) -> None:
        model = model_from_angle(6, 90.0, 0.4, seed=9)
        a = generate_collection(model, 50, 0.3)
        b = generate_collection(model, 50, 0.3)
        np.testing.assert_array_equal(a.vectors, b.vectors)
        np.testing.assert_array_equal(a.hidden_labels, b.hidden_labels)
        c = generate_collection(model, 50, 0.3, np.random.default_rng(10))
        assert not np.array_equal(a.vectors, c.vectors)

    def test_sigma_zero_emits_exact_centers(self) -> None:
        model = model_from_angle(4, 90.0, 0.0)
        s = generate_collection(model, 20, 0.5, np.random.default_rng(1))
        for row, label in zip(s.vectors, s.hidden_labels):
            center = model.center0 if label == 0 else model.center1
            np.testing.assert_array_equal(row, center)

    def test_groups_are_interleaved(self) -> None:
        model = model_from_angle(3, 90.0, 0.2)
        s = generate_collection(model, 200, 0.5, np.random.default_rng(2))
        labels = np.asarray(s.hidden_labels)
        assert not np.all(labels[:100] == 0)

    def test_validation(self) -> None:
        model = model_from_angle(3, 90.0, 0.2)
        with pytest.raises(InvalidParameterError):
            generate_collection(model, 0, 0.5)
        with pytest.raises(InvalidParameterError):
            generate_collection(model, 10, 1.2)
        with pytest.raises(InvalidParameterError):
            generate_collection(model, 10, -0.1)


class TestGenerateLabeledSet:
    def test_balanced_counts(self) -> None:
        model = model_from_angle(5, 90.0, 0.3)
        pool = generate_labeled_set(model, 12, np.random.default_rng(3))
        assert pool.count(0) == 12 and pool.count(1) == 12

    def test_deterministic(self) -> None:
        model = model_from_angle(5, 90.0, 0.3, seed=4)
        a = generate_labeled_set(model, 6)
        b = generate_labeled_set(model, 6)
        np.testing.assert_array_equal(a.vectors, b.vectors)


class TestExpectedGamma:
    def test_sigma_zero_orthogonal_is_one(self) -> None:
        model = model_from_angle(8, 90.0, 0.0)
        assert expected_gamma(model) == pytest.approx(1.0, abs=1e-12)
        profile = gamma_profile(model)
        assert profile.mu_same == pytest.approx(2.0, abs=1e-12)
        assert profile.mu_diff == pytest.approx(1.0, abs=1e-12)

    def test_monotone_decreasing_in_noise(self) -> None:
        values = [
            expected_gamma(
                model_from_angle(16, 90.0, sigma), rng=np.random.default_rng(5)
            )
            for sigma in (0.0, 0.2, 0.5, 1.0, 2.0)
        ]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_narrow_angle_weakens_separation(self) -> None:
        rng_a = np.random.default_rng(6)
        rng_b = np.random.default_rng(6)
        wide = expected_gamma(model_from_angle(16, 90.0, 0.3), rng=rng_a)
        narrow = expected_gamma(model_from_angle(16, 45.0, 0.3), rng=rng_b)
        assert narrow < wide

    def test_calibrated_regimes(self) -> None:
        strong = expected_gamma(model_from_angle(16, 90.0, 0.34))
        weak = expected_gamma(model_from_angle(16, 90.0, 0.85))
        assert 0.30 < strong < 0.40
        assert 0.05 < weak < 0.11

    def test_sample_size_validation(self) -> None:
        model = model_from_angle(4, 90.0, 0.1)
        with pytest.raises(InvalidParameterError):
            expected_gamma(model, n_mc=50)
