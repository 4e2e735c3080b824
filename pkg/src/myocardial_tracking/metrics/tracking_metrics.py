"""
Point-tracking accuracy metrics.

Errors are L1 distances measured after rescaling coordinates to a 256×256 grid, so
scores are comparable across input resolutions.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..errors import MetricError, ShapeError

logger = logging.getLogger(__name__)

EVAL_RESOLUTION = 256
DELTA_THRESHOLDS: Tuple[float, ...] = (1.0, 2.0, 4.0)
DRIFT_WARNING_PX = 0.5


@dataclass
class EvalFrame:
    """
    Predicted and reference trajectories on the evaluation grid.

    Attributes:
        predicted: [T, N, 2] (x, y) on the 256×256 grid
        reference: [T, N, 2] (x, y) on the 256×256 grid
        valid: [T, N] mask of pairs that count
        scale: (x, y) factors applied to the input-pixel coordinates
    """

    predicted: np.ndarray
    reference: np.ndarray
    valid: np.ndarray
    scale: Tuple[float, float]

    @classmethod
    def from_pixels(
        cls,
        predicted: np.ndarray,
        reference: np.ndarray,
        height: int,
        width: int,
        valid: Optional[np.ndarray] = None,
    ) -> "EvalFrame":
        """
        Rescale input-pixel trajectories of an H×W video to the evaluation grid.

        Raises:
            ShapeError: If the trajectories do not share [T, N, 2]
        """
        predicted = np.asarray(predicted, dtype=np.float64)
        reference = np.asarray(reference, dtype=np.float64)
        if predicted.shape != reference.shape or predicted.ndim != 3 or predicted.shape[-1] != 2:
            raise ShapeError("EvalFrame", predicted.shape, reference.shape, "expected matching [T, N, 2]")
        if valid is None:
            valid = np.ones(predicted.shape[:2], dtype=bool)
        valid = np.asarray(valid, dtype=bool)
        if valid.shape != predicted.shape[:2]:
            raise ShapeError("EvalFrame", valid.shape, predicted.shape[:2], "validity mask must be [T, N]")
        scale = np.array([EVAL_RESOLUTION / width, EVAL_RESOLUTION / height])
        return cls(predicted * scale, reference * scale, valid, (float(scale[0]), float(scale[1])))

    def errors(self) -> np.ndarray:
        """L1 errors of the valid (t, n) pairs, flattened."""
        per_pair = np.abs(self.predicted - self.reference).sum(axis=-1)
        return per_pair[self.valid]


def _pooled_errors(frames: Sequence[EvalFrame]) -> np.ndarray:
    if isinstance(frames, EvalFrame):
        frames = [frames]
    errors = np.concatenate([f.errors() for f in frames]) if frames else np.zeros(0)
    if errors.size == 0:
        raise MetricError("no valid trajectory points to evaluate")
    return errors


def delta_accuracy(frames, threshold: float) -> float:
    """
    Percentage of point-frame pairs with L1 error strictly below `threshold`.

    Args:
        frames: An EvalFrame or a sequence of them (pooled)
        threshold: Tolerance x in evaluation-grid pixels
    """
    errors = _pooled_errors(frames)
    return float(100.0 * np.mean(errors < threshold))


def delta_avg(frames, thresholds: Sequence[float] = DELTA_THRESHOLDS) -> float:
    """Mean of δˣ over the thresholds (default 1, 2 and 4 pixels)."""
    return float(np.mean([delta_accuracy(frames, x) for x in thresholds]))


def mte(frames) -> float:
    """Median trajectory error: median L1 error over all point-frame pairs."""
    return float(np.median(_pooled_errors(frames)))


@dataclass
class TrackingMetrics:
    """Tracking accuracy summary."""

    delta_1: float
    delta_2: float
    delta_4: float
    delta_avg: float
    mte: float

    def to_dict(self) -> Dict[str, float]:
        """Convert metrics to dictionary."""
        return {
            "delta_1": self.delta_1,
            "delta_2": self.delta_2,
            "delta_4": self.delta_4,
            "delta_avg": self.delta_avg,
            "mte": self.mte,
        }

    def __repr__(self) -> str:
        return (
            f"TrackingMetrics(\n"
            f"  delta_1={self.delta_1:.2f},\n"
            f"  delta_2={self.delta_2:.2f},\n"
            f"  delta_4={self.delta_4:.2f},\n"
            f"  delta_avg={self.delta_avg:.2f},\n"
            f"  mte={self.mte:.3f}\n"
            f")"
        )


def evaluate(frames) -> TrackingMetrics:
    """All tracking metrics for one EvalFrame or a pooled sequence of them."""
    deltas = [delta_accuracy(frames, x) for x in DELTA_THRESHOLDS]
    return TrackingMetrics(
        delta_1=deltas[0],
        delta_2=deltas[1],
        delta_4=deltas[2],
        delta_avg=float(np.mean(deltas)),
        mte=mte(frames),
    )


def static_baseline(queries: np.ndarray, n_frames: int) -> np.ndarray:
    """Prediction that never moves: the query points repeated for every frame."""
    queries = np.asarray(queries, dtype=np.float64)
    return np.repeat(queries[None], n_frames, axis=0)


def relative_improvement(method: TrackingMetrics, baseline: TrackingMetrics) -> Dict[str, float]:
    """
    Compare a method with a baseline.

    Returns:
        delta_avg_points: δ_avg difference in percentage points
        delta_avg_gain_pct: relative δ_avg gain in percent
        mte_reduction_pct: relative MTE reduction in percent
    """
    gain = 100.0 * (method.delta_avg - baseline.delta_avg) / baseline.delta_avg if baseline.delta_avg else float("inf")
    reduction = 100.0 * (baseline.mte - method.mte) / baseline.mte if baseline.mte else 0.0
    return {
        "delta_avg_points": method.delta_avg - baseline.delta_avg,
        "delta_avg_gain_pct": gain,
        "mte_reduction_pct": reduction,
    }


def query_frame_drift(predicted: np.ndarray, queries: np.ndarray, query_frame: int = 0) -> float:
    """Mean L1 distance (input pixels) between the refined query-frame row and the query points."""
    predicted = np.asarray(predicted, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    if predicted.ndim != 3 or predicted.shape[1:] != queries.shape:
        raise ShapeError("query_frame_drift", predicted.shape, queries.shape, "expected [T, N, 2] and [N, 2]")
    drift = float(np.abs(predicted[query_frame] - queries).sum(axis=-1).mean())
    if drift > DRIFT_WARNING_PX:
        logger.warning("query-frame drift %.3f px exceeds %.1f px", drift, DRIFT_WARNING_PX)
    return drift
