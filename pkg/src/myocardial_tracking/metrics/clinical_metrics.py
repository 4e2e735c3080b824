"""
Clinical strain metrics.

Global longitudinal strain (GLS) from tracked wall points, agreement of a method with
a reference, and test-retest reproducibility.
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import savgol_filter

from ..errors import MetricError, ShapeError

LOA_FACTOR = 1.96
CV_DEFINITION = "within-subject CV = 100*sqrt(mean(d^2)/2)/|grand mean|"


@dataclass
class GlsSeries:
    """
    Wall length over the cycle and the resulting peak strain.

    Attributes:
        lengths: L(t) per frame
        ed_index: End-diastolic frame
        peak_gls: 100·(min L − L_ED)/L_ED, in percent
        units: "px" or "mm"
    """

    lengths: np.ndarray
    ed_index: int
    peak_gls: float
    units: str = "px"

    @property
    def strain_curve(self) -> np.ndarray:
        """Strain per frame relative to end-diastole, in percent."""
        ed = self.lengths[self.ed_index]
        return 100.0 * (self.lengths - ed) / ed

    def to_dict(self) -> Dict[str, object]:
        return {
            "lengths": [float(v) for v in self.lengths],
            "ed_index": self.ed_index,
            "peak_gls": self.peak_gls,
            "units": self.units,
        }


def wall_lengths(
    trajectories: np.ndarray,
    wall_order: Optional[Sequence[int]] = None,
    pixel_spacing: Optional[Union[float, Tuple[float, float]]] = None,
) -> np.ndarray:
    """Sum of consecutive-point Euclidean distances along the wall, per frame."""
    trajectories = np.asarray(trajectories, dtype=np.float64)
    if trajectories.ndim != 3 or trajectories.shape[-1] != 2:
        raise ShapeError("gls", trajectories.shape, (), "expected [T, N, 2]")
    if trajectories.shape[1] < 2:
        raise MetricError(f"GLS needs at least 2 wall points, got {trajectories.shape[1]}")
    if wall_order is not None:
        trajectories = trajectories[:, np.asarray(wall_order, dtype=int)]
    if pixel_spacing is not None:
        trajectories = trajectories * np.broadcast_to(np.asarray(pixel_spacing, dtype=np.float64), (2,))
    return np.linalg.norm(np.diff(trajectories, axis=1), axis=-1).sum(axis=1)


def gls(
    trajectories: np.ndarray,
    wall_order: Optional[Sequence[int]] = None,
    pixel_spacing: Optional[Union[float, Tuple[float, float]]] = None,
    ed_index: int = 0,
    smooth_window: Optional[int] = None,
) -> GlsSeries:
    """
    Global longitudinal strain of a tracked wall.

    Args:
        trajectories: [T, N, 2] wall points
        wall_order: Order of the points along the wall (default: index order)
        pixel_spacing: Physical size of a pixel, scalar or (x, y), giving lengths in mm
        ed_index: End-diastolic frame
        smooth_window: Optional odd Savitzky-Golay window applied to L(t)

    Returns:
        GlsSeries with L(t) and peak GLS

    Raises:
        MetricError: If fewer than 2 points are given or a length is not positive
    """
    lengths = wall_lengths(trajectories, wall_order, pixel_spacing)
    if not 0 <= ed_index < lengths.size:
        raise MetricError(f"end-diastolic index {ed_index} outside [0, {lengths.size})")
    if smooth_window is not None:
        if smooth_window % 2 == 0 or smooth_window < 3 or smooth_window > lengths.size:
            raise MetricError(f"smoothing window must be odd, >= 3 and <= T, got {smooth_window}")
        lengths = savgol_filter(lengths, smooth_window, polyorder=2, mode="interp")
    if np.any(lengths <= 0):
        raise MetricError("wall length must be positive in every frame")
    ed = lengths[ed_index]
    peak = 100.0 * (lengths.min() - ed) / ed
    return GlsSeries(lengths=lengths, ed_index=ed_index, peak_gls=float(peak), units="mm" if pixel_spacing is not None else "px")


@dataclass
class AgreementStats:
    """Method-versus-reference statistics of paired GLS values."""

    mean_method: float
    sd_method: float
    mean_reference: float
    sd_reference: float
    mu: float
    sigma: float
    mad: float
    n_pairs: int

    @property
    def limits_of_agreement(self) -> Tuple[float, float]:
        return (self.mu - LOA_FACTOR * self.sigma, self.mu + LOA_FACTOR * self.sigma)

    def to_dict(self) -> Dict[str, float]:
        low, high = self.limits_of_agreement
        return {
            "mean_method": self.mean_method,
            "sd_method": self.sd_method,
            "mean_reference": self.mean_reference,
            "sd_reference": self.sd_reference,
            "mu": self.mu,
            "sigma": self.sigma,
            "mad": self.mad,
            "loa_low": low,
            "loa_high": high,
            "n_pairs": self.n_pairs,
        }


def _paired(first: Sequence[float], second: Sequence[float], minimum: int) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(first, dtype=np.float64).reshape(-1)
    b = np.asarray(second, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise MetricError(f"paired measurements differ in count: {a.size} vs {b.size}")
    if a.size < minimum:
        raise MetricError(f"at least {minimum} pairs required, got {a.size}")
    return a, b


def agreement(method: Sequence[float], reference: Sequence[float]) -> AgreementStats:
    """
    Differences d = method − reference: mean μ, sample SD σ (n−1) and mean absolute difference.

    Raises:
        MetricError: With fewer than 2 pairs
    """
    a, b = _paired(method, reference, 2)
    d = a - b
    return AgreementStats(
        mean_method=float(a.mean()),
        sd_method=float(a.std(ddof=1)),
        mean_reference=float(b.mean()),
        sd_reference=float(b.std(ddof=1)),
        mu=float(d.mean()),
        sigma=float(d.std(ddof=1)),
        mad=float(np.abs(d).mean()),
        n_pairs=int(d.size),
    )


@dataclass
class TestRetestStats:
    """Reproducibility of repeated acquisitions."""

    __test__ = False

    mad: float
    cv: float
    n_pairs: int
    cv_definition: str = CV_DEFINITION

    def to_dict(self) -> Dict[str, object]:
        return {"mad": self.mad, "cv": self.cv, "n_pairs": self.n_pairs, "cv_definition": self.cv_definition}


def test_retest(first: Sequence[float], second: Sequence[float]) -> TestRetestStats:
    """
    Mean absolute difference and within-subject coefficient of variation (percent).

    CV = 100·sqrt(mean(d²)/2) / |mean of all measurements|.

    Raises:
        MetricError: If no pairs are given or the grand mean is zero
    """
    a, b = _paired(first, second, 1)
    d = a - b
    grand_mean = float(np.concatenate([a, b]).mean())
    if grand_mean == 0.0:
        raise MetricError("coefficient of variation undefined for a zero grand mean")
    cv = 100.0 * np.sqrt(np.mean(d * d) / 2.0) / abs(grand_mean)
    return TestRetestStats(mad=float(np.abs(d).mean()), cv=float(cv), n_pairs=int(d.size))


# keeps pytest from collecting the function when it is imported into a test module
test_retest.__test__ = False  # type: ignore[attr-defined]


def patient_gls(view_gls: Mapping[str, float]) -> float:
    """Per-patient GLS: mean peak GLS over the available apical views (e.g. A4C, A2C, A3C)."""
    if not view_gls:
        raise MetricError("patient GLS needs at least one view")
    return float(np.mean(list(view_gls.values())))
