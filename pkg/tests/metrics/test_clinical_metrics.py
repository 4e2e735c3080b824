"""Tests for strain, agreement and reproducibility metrics."""

import numpy as np
import pytest

from myocardial_tracking.errors import MetricError
from myocardial_tracking.metrics import agreement, gls, patient_gls, wall_lengths
from myocardial_tracking.metrics import clinical_metrics as cm


def straight_wall(lengths):
    """Two-point walls along x whose lengths follow `lengths`."""
    lengths = np.asarray(lengths, dtype=np.float64)
    trajectories = np.zeros((lengths.size, 2, 2))
    trajectories[:, 1, 0] = lengths
    return trajectories


def test_gls_sign_convention():
    """Test L_ED = 100 and min L = 83 giving −17 %."""
    series = gls(straight_wall([100.0, 90.0, 83.0, 95.0]))
    assert series.peak_gls == pytest.approx(-17.0)
    np.testing.assert_allclose(series.strain_curve, [0.0, -10.0, -17.0, -5.0])
    assert series.units == "px"


def test_gls_constant_wall_is_zero():
    """Test that an undeformed wall has zero strain."""
    assert gls(straight_wall([50.0] * 5)).peak_gls == 0.0


def test_gls_follows_wall_order_and_spacing():
    """Test polyline ordering and conversion to millimetres."""
    points = np.array([[[0.0, 0.0], [2.0, 0.0], [1.0, 0.0]]])
    np.testing.assert_allclose(wall_lengths(points), [3.0])
    np.testing.assert_allclose(wall_lengths(points, wall_order=[0, 2, 1]), [2.0])
    np.testing.assert_allclose(wall_lengths(points, wall_order=[0, 2, 1], pixel_spacing=0.3), [0.6])
    assert gls(straight_wall([10.0, 8.0]), pixel_spacing=(0.5, 0.5)).units == "mm"


def test_gls_smoothing_and_errors():
    """Test the optional smoothing window and invalid inputs."""
    lengths = 100.0 - 10.0 * np.sin(np.linspace(0, np.pi, 9)) ** 2
    smoothed = gls(straight_wall(lengths), smooth_window=5)
    assert smoothed.lengths.shape == (9,)
    assert smoothed.peak_gls < 0
    with pytest.raises(MetricError):
        gls(straight_wall(lengths), smooth_window=4)
    with pytest.raises(MetricError):
        gls(straight_wall(lengths), ed_index=9)
    with pytest.raises(MetricError, match="2 wall points"):
        gls(np.zeros((3, 1, 2)))
    with pytest.raises(MetricError, match="positive"):
        gls(np.zeros((3, 2, 2)))


def test_agreement_hand_case():
    """Test differences {1, −1, 2}: μ 0.667, σ 1.528, MAD 1.333."""
    stats = agreement([-15.0, -19.0, -16.0], [-16.0, -18.0, -18.0])
    assert stats.mu == pytest.approx(0.667, abs=5e-4)
    assert stats.sigma == pytest.approx(1.528, abs=5e-4)
    assert stats.mad == pytest.approx(1.333, abs=5e-4)
    low, high = stats.limits_of_agreement
    assert high - low == pytest.approx(2 * 1.96 * stats.sigma)
    assert stats.to_dict()["n_pairs"] == 3


def test_agreement_identical_arms():
    """Test that identical measurements agree perfectly."""
    stats = agreement([-18.0, -20.0], [-18.0, -20.0])
    assert stats.mu == 0.0 and stats.sigma == 0.0 and stats.mad == 0.0


def test_agreement_needs_two_pairs():
    """Test the minimum pair count and equal lengths."""
    with pytest.raises(MetricError):
        agreement([-18.0], [-17.0])
    with pytest.raises(MetricError):
        agreement([-18.0, -17.0], [-17.0])


def test_test_retest_hand_case():
    """Test a single pair (−16, −18): MAD 2 and CV 8.32 %."""
    stats = cm.test_retest([-16.0], [-18.0])
    assert stats.mad == pytest.approx(2.0)
    assert stats.cv == pytest.approx(8.32, abs=0.005)
    assert stats.n_pairs == 1
    assert "sqrt" in stats.to_dict()["cv_definition"]


def test_test_retest_identical_and_errors():
    """Test identical repeats and an undefined coefficient of variation."""
    stats = cm.test_retest([-16.0, -20.0], [-16.0, -20.0])
    assert stats.mad == 0.0 and stats.cv == 0.0
    with pytest.raises(MetricError):
        cm.test_retest([1.0], [-1.0])
    with pytest.raises(MetricError):
        cm.test_retest([], [])


def test_patient_gls_averages_views():
    """Test the per-patient mean over apical views."""
    assert patient_gls({"A4C": -18.0, "A2C": -20.0, "A3C": -19.0}) == pytest.approx(-19.0)
    with pytest.raises(MetricError):
        patient_gls({})


@pytest.mark.parametrize("seed", range(10))
def test_gls_ignores_rigid_motion(seed):
    """Test that rotating and translating the whole wall leaves lengths and peak GLS unchanged."""
    rng = np.random.default_rng(seed)
    wall = np.cumsum(rng.uniform(1.0, 3.0, size=(1, 7, 2)), axis=1)
    trajectories = wall * rng.uniform(0.85, 1.0, size=(6, 1, 1))
    angle = rng.uniform(-np.pi, np.pi)
    rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    moved = trajectories @ rotation.T + rng.uniform(-50.0, 50.0, size=2)
    original, rigid = gls(trajectories), gls(moved)
    np.testing.assert_allclose(rigid.lengths, original.lengths, rtol=1e-12)
    assert rigid.peak_gls == pytest.approx(original.peak_gls, abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_agreement_swaps_sign_with_arms(seed):
    """Test that exchanging method and reference negates the bias and mirrors the limits."""
    rng = np.random.default_rng(seed)
    method = rng.normal(-18.0, 3.0, size=12)
    reference = method + rng.normal(0.5, 1.0, size=12)
    forward, backward = agreement(method, reference), agreement(reference, method)
    assert backward.mu == pytest.approx(-forward.mu)
    assert backward.sigma == pytest.approx(forward.sigma)
    assert backward.mad == pytest.approx(forward.mad)
    low, high = forward.limits_of_agreement
    assert backward.limits_of_agreement == pytest.approx((-high, -low))
