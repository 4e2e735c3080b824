"""Tests for point-tracking accuracy metrics."""

import numpy as np
import pytest

from myocardial_tracking.errors import MetricError, ShapeError
from myocardial_tracking.metrics import (
    EvalFrame,
    TrackingMetrics,
    delta_accuracy,
    delta_avg,
    evaluate,
    mte,
    query_frame_drift,
    relative_improvement,
    static_baseline,
)


def offset_frame(offsets, size=256):
    """One frame of points whose x error is given by `offsets`."""
    reference = np.full((1, len(offsets), 2), 100.0)
    predicted = reference.copy()
    predicted[0, :, 0] += np.asarray(offsets, dtype=np.float64)
    return EvalFrame.from_pixels(predicted, reference, size, size)


def test_perfect_prediction_scores_100():
    """Test that exact predictions hit every threshold and have zero MTE."""
    reference = np.random.default_rng(0).uniform(0, 63, size=(5, 4, 2))
    metrics = evaluate(EvalFrame.from_pixels(reference, reference, 64, 64))
    assert metrics.delta_1 == metrics.delta_2 == metrics.delta_4 == 100.0
    assert metrics.delta_avg == 100.0 and metrics.mte == 0.0


def test_uniform_offset_case():
    """Test a uniform (1.5, 0) offset: δ¹ = 0, δ² = δ⁴ = 100, δ_avg = 66.67."""
    reference = np.random.default_rng(1).uniform(0, 255, size=(4, 3, 2))
    frame = EvalFrame.from_pixels(reference + np.array([1.5, 0.0]), reference, 256, 256)
    assert delta_accuracy(frame, 1.0) == 0.0
    assert delta_accuracy(frame, 2.0) == 100.0
    assert delta_accuracy(frame, 4.0) == 100.0
    assert delta_avg(frame) == pytest.approx(66.67, abs=0.005)


def test_threshold_is_strict():
    """Test that an error equal to the threshold does not count."""
    assert delta_accuracy(offset_frame([2.0]), 2.0) == 0.0
    assert delta_accuracy(offset_frame([1.999]), 2.0) == 100.0


def test_errors_are_measured_on_the_256_grid():
    """Test that a 64×64 video scales errors by four."""
    frame = offset_frame([0.375], size=64)
    assert frame.scale == (4.0, 4.0)
    np.testing.assert_allclose(frame.errors(), [1.5])


def test_mte_median_rules():
    """Test odd and even median counts."""
    assert mte(offset_frame([1.0, 2.0, 9.0])) == 2.0
    assert mte(offset_frame([1.0, 3.0])) == 2.0


def test_mte_matches_sorted_reference():
    """Test the median against an explicit sort on a random instance."""
    rng = np.random.default_rng(2)
    predicted, reference = rng.uniform(0, 255, size=(2, 7, 5, 2))
    frame = EvalFrame.from_pixels(predicted, reference, 256, 256)
    errors = np.sort(np.abs(predicted - reference).sum(axis=-1).reshape(-1))
    middle = errors.size // 2
    expected = errors[middle] if errors.size % 2 else 0.5 * (errors[middle - 1] + errors[middle])
    assert mte(frame) == expected


def test_pooling_and_validity_mask():
    """Test that several clips pool their pairs and masked pairs are ignored."""
    good, bad = offset_frame([0.5, 0.5]), offset_frame([3.0, 3.0])
    assert delta_accuracy([good, bad], 1.0) == 50.0
    reference = np.zeros((1, 2, 2))
    predicted = np.array([[[0.5, 0.0], [50.0, 0.0]]])
    masked = EvalFrame.from_pixels(predicted, reference, 256, 256, valid=np.array([[True, False]]))
    assert delta_accuracy(masked, 1.0) == 100.0
    with pytest.raises(MetricError):
        mte(EvalFrame.from_pixels(predicted, reference, 256, 256, valid=np.zeros((1, 2), dtype=bool)))


def test_shape_mismatch():
    """Test that trajectories with different extents are rejected."""
    with pytest.raises(ShapeError):
        EvalFrame.from_pixels(np.zeros((2, 3, 2)), np.zeros((2, 4, 2)), 64, 64)
    with pytest.raises(ShapeError):
        EvalFrame.from_pixels(np.zeros((2, 3, 2)), np.zeros((2, 3, 2)), 64, 64, valid=np.ones((3, 2)))


def test_static_baseline_and_improvement():
    """Test the never-moving prediction and the relative gain over it."""
    queries = np.array([[1.0, 2.0], [3.0, 4.0]])
    static = static_baseline(queries, 3)
    assert static.shape == (3, 2, 2)
    np.testing.assert_array_equal(static[2], queries)
    method = TrackingMetrics(delta_1=60.0, delta_2=80.0, delta_4=100.0, delta_avg=80.0, mte=1.0)
    baseline = TrackingMetrics(delta_1=20.0, delta_2=40.0, delta_4=60.0, delta_avg=40.0, mte=4.0)
    gain = relative_improvement(method, baseline)
    assert gain["delta_avg_points"] == 40.0
    assert gain["delta_avg_gain_pct"] == 100.0
    assert gain["mte_reduction_pct"] == 75.0


def test_query_frame_drift(caplog):
    """Test drift of the query-frame row and the warning above half a pixel."""
    queries = np.array([[10.0, 10.0], [20.0, 20.0]])
    predicted = np.repeat(queries[None], 3, axis=0)
    assert query_frame_drift(predicted, queries) == 0.0
    predicted[1] += np.array([1.0, 0.5])
    assert query_frame_drift(predicted, queries, query_frame=1) == pytest.approx(1.5)
    assert "drift" in caplog.text
    with pytest.raises(ShapeError):
        query_frame_drift(predicted, queries[:1])


@pytest.mark.parametrize("seed", range(10))
def test_scores_ignore_joint_translation(seed):
    """Test that moving prediction and reference by the same offset keeps δ and MTE."""
    rng = np.random.default_rng(seed)
    reference = rng.uniform(0, 63, size=(6, 5, 2))
    predicted = reference + rng.normal(0.0, 0.6, size=reference.shape)
    offset = rng.uniform(-20.0, 20.0, size=2)
    before = evaluate(EvalFrame.from_pixels(predicted, reference, 64, 64))
    after = evaluate(EvalFrame.from_pixels(predicted + offset, reference + offset, 64, 64))
    for key, value in before.to_dict().items():
        assert after.to_dict()[key] == pytest.approx(value, abs=1e-9), key


@pytest.mark.parametrize("seed", range(10))
def test_delta_accuracy_grows_with_threshold(seed):
    """Test that δˣ never decreases as the tolerance x grows."""
    rng = np.random.default_rng(seed)
    reference = rng.uniform(0, 127, size=(4, 8, 2))
    predicted = reference + rng.normal(0.0, 1.5, size=reference.shape)
    frame = EvalFrame.from_pixels(predicted, reference, 128, 128)
    scores = [delta_accuracy(frame, x) for x in np.linspace(0.0, 12.0, 49)]
    assert np.all(np.diff(scores) >= 0.0)
    assert scores[0] == 0.0
