"""
Local 4D correlation between query windows and per-frame track windows.

For every point and frame an r×r window of features around the current trajectory
estimate is compared, entry by entry, with the r×r window around the query point at
the query frame. The resulting r⁴ cosine volume is encoded per level into D features and
the three correlation levels are concatenated into 3·D-wide tokens.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple, Union

import numpy as np

from ..autograd import (
    Tensor,
    add,
    bilinear_sample,
    broadcast_to,
    concat,
    einsum,
    l2_normalize_lastdim,
    layer_norm_lastdim,
    matmul,
    relu,
    reshape,
    take,
)
from ..backbones import CORRELATION_LEVELS, FeaturePyramid
from ..errors import ConfigError, ShapeError
from ..params import ModelParams, init_linear, linear

logger = logging.getLogger(__name__)

# Both are plain tensors; the aliases document the expected layout.
Corr4D = Tensor  # [T, N, r, r, r, r]
CorrTokens = Tensor  # [T, N, 3·D]


@dataclass
class CorrConfig:
    """
    Correlation configuration.

    Attributes:
        window: Side length r of the sampled windows (odd, at least 3)
        token_dim: Encoded width D per level
        levels: Pyramid levels used for correlation
        normalize_features: Layer-normalise each level before sampling
    """

    window: int = 9
    token_dim: int = 32
    levels: Tuple[int, ...] = CORRELATION_LEVELS
    normalize_features: bool = True

    def __post_init__(self) -> None:
        self.levels = tuple(int(level) for level in self.levels)

    def validate(self) -> None:
        if self.window < 3 or self.window % 2 == 0:
            raise ConfigError(f"corr.window must be odd and >= 3, got {self.window}")
        if self.token_dim < 1:
            raise ConfigError(f"corr.token_dim must be positive, got {self.token_dim}")
        if self.levels != CORRELATION_LEVELS:
            raise ConfigError(f"corr.levels must be {CORRELATION_LEVELS}, got {self.levels}")

    @property
    def token_width(self) -> int:
        return len(self.levels) * self.token_dim

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["levels"] = list(self.levels)
        return data


def window_offsets(window: int) -> np.ndarray:
    """(row, col) offsets of an r×r grid at one-cell spacing, row-major, centred on zero."""
    half = (window - 1) / 2.0
    rows, cols = np.meshgrid(np.arange(window) - half, np.arange(window) - half, indexing="ij")
    return np.stack([rows.reshape(-1), cols.reshape(-1)], axis=-1)


def _pixels_to_cells(centers: Tensor, stride: int) -> Tensor:
    """Map (x, y) input pixels [P, 2] to (row, col) feature cells of a stride-k level."""
    swap = Tensor([[0.0, 1.0 / stride], [1.0 / stride, 0.0]], dtype=centers.dtype)
    return matmul(centers, swap)


def sample_windows(fmap: Tensor, centers: Tensor, stride: int, window: int) -> Tensor:
    """
    Bilinearly sample r×r feature windows around trajectory positions.

    Args:
        fmap: One level, [T, h, w, d] (per-frame centres) or [h, w, d] (one frame)
        centers: (x, y) input-pixel positions, [T, N, 2] or [N, 2] to match `fmap`
        stride: Level stride k; positions are divided by k
        window: Window side r

    Returns:
        Windows [T, N, r, r, d] or [N, r, r, d]
    """
    batched = fmap.ndim == 4
    expected = 3 if batched else 2
    if centers.ndim != expected or centers.shape[-1] != 2:
        raise ShapeError("sample_windows", fmap.shape, centers.shape, "centres must be (x, y) per point")
    if batched and centers.shape[0] != fmap.shape[0]:
        raise ShapeError("sample_windows", fmap.shape, centers.shape, "frame counts differ")

    lead = centers.shape[:-1]
    flat = reshape(centers, (-1, 2))
    cells = _pixels_to_cells(flat, stride)
    n_offsets = window * window
    ones = Tensor(np.ones(n_offsets), dtype=cells.dtype)
    offsets = Tensor(window_offsets(window), dtype=cells.dtype)
    grid = add(
        einsum("pc,o->poc", cells, ones),
        broadcast_to(offsets, (flat.shape[0], n_offsets, 2)),
    )
    if batched:
        n_frames, n_points = lead
        coords = reshape(grid, (n_frames, n_points * n_offsets, 2))
    else:
        coords = reshape(grid, (lead[0] * n_offsets, 2))
    samples = bilinear_sample(fmap, coords)
    return reshape(samples, lead + (window, window, fmap.shape[-1]))


def cosine_corr4d(query_windows: Tensor, track_windows: Tensor) -> Corr4D:
    """
    All-pair cosine similarity between query and track windows.

    Args:
        query_windows: [N, r, r, d]
        track_windows: [T, N, r, r, d]

    Returns:
        Corr4D [T, N, r, r, r, r]; entry (t, n, i, j, u, v) compares query cell (i, j)
        with track cell (u, v). Zero vectors give zero similarity.
    """
    if query_windows.ndim != 4 or track_windows.ndim != 5 or query_windows.shape != track_windows.shape[1:]:
        raise ShapeError("cosine_corr4d", query_windows.shape, track_windows.shape, "expected [N,r,r,d] and [T,N,r,r,d]")
    q = l2_normalize_lastdim(query_windows)
    f = l2_normalize_lastdim(track_windows)
    return einsum("nijd,tnuvd->tnijuv", q, f)


def corr2d(query_windows: Tensor, track_windows: Tensor) -> Tensor:
    """
    Centre-vs-window cosine correlation, [T, N, r, r].

    Comparison helper only: the tracker always uses the 4D volume.
    """
    if query_windows.ndim != 4 or track_windows.ndim != 5 or query_windows.shape != track_windows.shape[1:]:
        raise ShapeError("corr2d", query_windows.shape, track_windows.shape, "expected [N,r,r,d] and [T,N,r,r,d]")
    centre = (query_windows.shape[1] - 1) // 2
    rows = take(query_windows, np.asarray(centre), axis=1)
    centres = take(rows, np.asarray(centre), axis=1)
    return einsum("nd,tnuvd->tnuv", l2_normalize_lastdim(centres), l2_normalize_lastdim(track_windows))


def encoder_name(level: int) -> str:
    return f"corr.level{level}"


def init_corr_encoders(params: ModelParams, rng: np.random.Generator, config: CorrConfig) -> None:
    """Register one two-layer encoder (r⁴ → 4D → D) per correlation level."""
    volume = config.window ** 4
    for level in config.levels:
        name = encoder_name(level)
        init_linear(params, rng, f"{name}.fc1", volume, 4 * config.token_dim)
        init_linear(params, rng, f"{name}.fc2", 4 * config.token_dim, config.token_dim)


def encode_corr(corr: Corr4D, params: ModelParams, level: int) -> Tensor:
    """
    Encode each (t, n) correlation volume into D features.

    Args:
        corr: [T, N, r, r, r, r]
        params: Model parameters holding the level's encoder
        level: Pyramid level whose encoder is used

    Returns:
        [T, N, D]
    """
    n_frames, n_points = corr.shape[:2]
    flat = reshape(corr, (n_frames, n_points, -1))
    name = encoder_name(level)
    hidden = relu(linear(flat, params, f"{name}.fc1"))
    return linear(hidden, params, f"{name}.fc2")


def prepare_level(pyramid: FeaturePyramid, level: int, normalize: bool) -> Tensor:
    fmap = pyramid.level(level)
    return layer_norm_lastdim(fmap) if normalize else fmap


def build_tokens(
    pyramid: FeaturePyramid,
    queries: Union[Tensor, np.ndarray],
    query_frame: int,
    trajectories: Tensor,
    config: CorrConfig,
    params: ModelParams,
) -> CorrTokens:
    """
    Multi-scale correlation tokens for the current trajectory estimate.

    Args:
        pyramid: Backbone features
        queries: Query points [N, 2] as (x, y) input pixels
        query_frame: Frame index t_q the queries live on
        trajectories: Current estimate [T, N, 2]
        config: Correlation configuration
        params: Model parameters

    Returns:
        CorrTokens [T, N, 3·D]
    """
    if not isinstance(queries, Tensor):
        queries = Tensor(queries)
    n_frames = pyramid.n_frames
    if trajectories.shape[0] != n_frames or trajectories.shape[1:] != queries.shape:
        raise ShapeError("build_tokens", trajectories.shape, queries.shape, f"expected [{n_frames}, N, 2] and [N, 2]")
    if not 0 <= query_frame < n_frames:
        raise ConfigError(f"query frame {query_frame} outside [0, {n_frames})")

    per_level = []
    for level in config.levels:
        fmap = prepare_level(pyramid, level, config.normalize_features)
        stride = pyramid.stride(level)
        query_map = take(fmap, np.asarray(query_frame), axis=0)
        query_windows = sample_windows(query_map, queries, stride, config.window)
        track_windows = sample_windows(fmap, trajectories, stride, config.window)
        corr = cosine_corr4d(query_windows, track_windows)
        per_level.append(encode_corr(corr, params, level))
    return concat(per_level, axis=-1)
