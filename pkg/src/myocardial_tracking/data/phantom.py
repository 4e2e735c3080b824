"""
Synthetic echocardiography-like cine sequences with exact ground-truth trajectories.

The myocardium is an annulus of speckle texture that contracts about its centre with
scale s(t) = 1 − a·sin²(π·t/(T−1)) and translates along the long (y) axis by
(a·R_inner/2)·sin²(π·t/(T−1)). Both vanish at t = 0 and t = T−1, so every trajectory
closes over the cycle. Tracked points sit on the mid-wall circle along an open arc
and are ordered along the wall.
"""

import logging
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

from ..errors import PhantomSpecError
from ..utils.threads import ordered_map

logger = logging.getLogger(__name__)

MAX_AMPLITUDE = 0.3
SPECKLE_MEAN = 0.5
SPECKLE_CONTRAST = 0.15


@dataclass
class PhantomSpec:
    """
    Phantom geometry, motion and appearance.

    Attributes:
        height: Frame height H in pixels
        width: Frame width W in pixels
        n_frames: Frames per cardiac cycle T
        n_points: Tracked points N
        amplitude: Peak fractional shortening a, in [0, 0.3]
        inner_radius: Endocardial radius in pixels
        outer_radius: Epicardial radius in pixels
        grain: Speckle grain σ_g in pixels
        noise: Additive Gaussian noise σ_n
        arc_degrees: Angular extent of the tracked wall arc
        scale_only: Disable the longitudinal translation
        seed: Default random seed
    """

    height: int = 64
    width: int = 64
    n_frames: int = 16
    n_points: int = 16
    amplitude: float = 0.15
    inner_radius: float = 4.0
    outer_radius: float = 28.0
    grain: float = 2.0
    noise: float = 0.02
    arc_degrees: float = 300.0
    scale_only: bool = False
    seed: int = 0

    @property
    def centre(self) -> np.ndarray:
        """(x, y) centre of the annulus."""
        return np.array([(self.width - 1) / 2.0, (self.height - 1) / 2.0])

    @property
    def mid_radius(self) -> float:
        return (self.inner_radius + self.outer_radius) / 2.0

    @property
    def translation_amplitude(self) -> float:
        return 0.0 if self.scale_only else self.amplitude * self.inner_radius / 2.0

    def displacement_bound(self) -> float:
        """Largest admissible L1 inter-frame displacement, a·R_outer·π/T."""
        return self.amplitude * self.outer_radius * np.pi / self.n_frames

    def worst_case_step(self) -> float:
        """
        Upper bound of the L1 inter-frame step of any mid-wall point.

        A point at offset (dx, dy) from the centre moves by Δφ·(−a·dx, h − a·dy) between
        frames, where Δφ is the change of the cycle phase and h the translation amplitude,
        so its L1 step is at most |Δφ|·(√2·a·R_mid + h).
        """
        if self.n_frames < 3:
            return 0.0
        phase_step = np.abs(np.diff(cycle_phase(self.n_frames))).max()
        return float(phase_step * (np.sqrt(2.0) * self.amplitude * self.mid_radius + self.translation_amplitude))

    def validate(self) -> None:
        if self.n_frames < 2:
            raise PhantomSpecError(f"phantom.n_frames must be >= 2, got {self.n_frames}")
        if self.n_points < 1:
            raise PhantomSpecError(f"phantom.n_points must be >= 1, got {self.n_points}")
        if not 0.0 <= self.amplitude <= MAX_AMPLITUDE:
            raise PhantomSpecError(f"phantom.amplitude must be in [0, {MAX_AMPLITUDE}], got {self.amplitude}")
        if not 0.0 < self.inner_radius < self.outer_radius:
            raise PhantomSpecError(
                f"phantom radii must satisfy 0 < inner < outer, got {self.inner_radius}, {self.outer_radius}"
            )
        if self.grain <= 0 or self.noise < 0:
            raise PhantomSpecError("phantom.grain must be positive and phantom.noise non-negative")
        if not 0.0 < self.arc_degrees <= 360.0:
            raise PhantomSpecError(f"phantom.arc_degrees must be in (0, 360], got {self.arc_degrees}")
        cx, cy = self.centre
        reach_x = self.outer_radius
        reach_y = self.outer_radius + self.translation_amplitude
        if cx - reach_x < 0 or cx + reach_x > self.width - 1 or cy - reach_y < 0 or cy + reach_y > self.height - 1:
            raise PhantomSpecError(
                f"annulus of outer radius {self.outer_radius} does not fit a {self.width}x{self.height} frame"
            )
        if self.worst_case_step() > self.displacement_bound() + 1e-12:
            raise PhantomSpecError(
                f"inter-frame motion {self.worst_case_step():.3f} px exceeds the local-motion bound "
                f"{self.displacement_bound():.3f} px; increase n_frames or outer_radius"
            )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class PhantomSample:
    """
    One generated sequence.

    Attributes:
        video: [T, H, W, 1] intensities in [0, 1]
        trajectories: Ground truth [T, N, 2] (x, y) pixels
        wall_order: Point indices in order along the wall
        seed: Seed the sample was generated from
        query_frame: Frame the queries are taken from (always 0)
    """

    video: np.ndarray
    trajectories: np.ndarray
    wall_order: np.ndarray
    seed: int
    query_frame: int = 0

    @property
    def queries(self) -> np.ndarray:
        return self.trajectories[self.query_frame].copy()

    @property
    def n_frames(self) -> int:
        return self.video.shape[0]

    @property
    def n_points(self) -> int:
        return self.trajectories.shape[1]


def cycle_phase(n_frames: int) -> np.ndarray:
    """sin²(π·t/(T−1)) for every frame: 0 at end-diastole, 1 mid-cycle."""
    t = np.arange(n_frames, dtype=np.float64)
    phase = np.sin(np.pi * t / (n_frames - 1)) ** 2
    phase[0] = phase[-1] = 0.0
    return phase


def scale_curve(spec: PhantomSpec) -> np.ndarray:
    """s(t) for every frame."""
    return 1.0 - spec.amplitude * cycle_phase(spec.n_frames)


def wall_points(spec: PhantomSpec) -> np.ndarray:
    """Reference (t = 0) positions of the tracked points on the mid-wall arc, [N, 2]."""
    gap = np.deg2rad(360.0 - spec.arc_degrees)
    if spec.n_points == 1:
        angles = np.array([1.5 * np.pi])
    else:
        # opening faces +y, the base of the ventricle in image coordinates
        start = 0.5 * np.pi + gap / 2.0
        stop = start + np.deg2rad(spec.arc_degrees)
        closed = spec.arc_degrees >= 360.0
        angles = np.linspace(start, stop, spec.n_points, endpoint=not closed)
    offsets = spec.mid_radius * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return spec.centre[None, :] + offsets


def deform(points: np.ndarray, spec: PhantomSpec) -> np.ndarray:
    """Map reference positions [P, 2] to every frame, [T, P, 2]."""
    phase = cycle_phase(spec.n_frames)
    scale = 1.0 - spec.amplitude * phase
    shift = spec.translation_amplitude * phase
    centre = spec.centre
    moved = centre + scale[:, None, None] * (points[None] - centre)
    moved[..., 1] += shift[:, None]
    return moved


def material_texture(spec: PhantomSpec, rng: np.random.Generator) -> np.ndarray:
    """Low-pass filtered white noise in reference coordinates, [H, W]."""
    white = rng.standard_normal((spec.height, spec.width))
    smooth = gaussian_filter(white, sigma=spec.grain, mode="wrap")
    std = smooth.std()
    if std > 0:
        smooth = smooth / std
    return np.clip(SPECKLE_MEAN + SPECKLE_CONTRAST * smooth, 0.0, 1.0)


def render_frame(texture: np.ndarray, spec: PhantomSpec, scale: float, shift: float) -> np.ndarray:
    """Warp the reference texture to one frame and mask it to the deformed annulus."""
    rows, cols = np.meshgrid(np.arange(spec.height, dtype=np.float64), np.arange(spec.width, dtype=np.float64), indexing="ij")
    cx, cy = spec.centre
    ref_x = cx + (cols - cx) / scale
    ref_y = cy + (rows - cy - shift) / scale
    values = map_coordinates(texture, [ref_y, ref_x], order=3, mode="reflect")
    radius = np.hypot(ref_x - cx, ref_y - cy)
    mask = (radius >= spec.inner_radius) & (radius <= spec.outer_radius)
    return np.where(mask, values, 0.0)


def max_step(trajectories: np.ndarray) -> float:
    """Largest L1 distance a point moves between consecutive frames of [T, N, 2] trajectories."""
    return float(np.abs(np.diff(trajectories, axis=0)).sum(axis=-1).max(initial=0.0))


def generate(spec: PhantomSpec, seed: Optional[int] = None) -> PhantomSample:
    """
    Generate one phantom sequence.

    Args:
        spec: Phantom specification (validated here)
        seed: Random seed; defaults to spec.seed

    Returns:
        PhantomSample with video, ground-truth trajectories and wall order

    Raises:
        PhantomSpecError: If the specification violates its invariants
    """
    spec.validate()
    seed = spec.seed if seed is None else int(seed)
    rng = np.random.default_rng(seed)
    texture = material_texture(spec, rng)

    phase = cycle_phase(spec.n_frames)
    frames = []
    for scale, shift in zip(1.0 - spec.amplitude * phase, spec.translation_amplitude * phase):
        frame = render_frame(texture, spec, scale, shift)
        if spec.noise > 0:
            frame = frame + spec.noise * rng.standard_normal(frame.shape)
        frames.append(np.clip(frame, 0.0, 1.0))
    video = np.stack(frames)[..., None].astype(np.float32)

    trajectories = deform(wall_points(spec), spec)
    step = max_step(trajectories)
    if step > spec.displacement_bound() + 1e-9:
        raise PhantomSpecError(f"generated step {step:.4f} px exceeds bound {spec.displacement_bound():.4f} px")
    logger.debug("phantom seed=%d: T=%d N=%d max step %.3f px", seed, spec.n_frames, spec.n_points, step)
    return PhantomSample(video=video, trajectories=trajectories, wall_order=np.arange(spec.n_points), seed=seed)


def generate_many(spec: PhantomSpec, count: int, seed: int = 0, workers: Optional[int] = None) -> List[PhantomSample]:
    """Generate `count` samples with seeds seed, seed+1, ...; output order follows the seeds."""
    if count < 0:
        raise PhantomSpecError(f"sample count must be >= 0, got {count}")
    spec.validate()
    return ordered_map(lambda s: generate(spec, s), range(seed, seed + count), workers)


def ood_spec(spec: PhantomSpec) -> PhantomSpec:
    """
    Out-of-distribution variant of a phantom specification.

    Smaller cavity, thicker wall, coarser speckle and stronger noise than `spec`.
    """
    shifted = replace(
        spec,
        inner_radius=0.75 * spec.inner_radius,
        outer_radius=1.1 * spec.outer_radius,
        grain=1.25 * spec.grain,
        noise=2.0 * spec.noise + 0.02,
        seed=spec.seed + 100_000,
    )
    shifted.validate()
    return shifted
