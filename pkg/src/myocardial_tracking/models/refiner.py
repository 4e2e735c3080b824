"""
Joint temporal refinement of trajectories.

Each refinement iteration embeds the correlation tokens of every (frame, point) pair
and runs a stack of transformer blocks that attend along each trajectory in time and
across a set of spatially related trajectories at the same frame. The output head
predicts a residual (Δx, Δy) for every frame and point.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from ..autograd import (
    Tensor,
    add,
    broadcast_to,
    einsum,
    get_default_dtype,
    layer_norm_lastdim,
    relu,
    reshape,
    scale,
    softmax_lastdim,
    sub,
    take,
    transpose,
)
from ..errors import ConfigError, ShapeError
from ..params import ModelParams, init_linear, linear, zeros

logger = logging.getLogger(__name__)

ReasoningMode = Literal["knp", "full-joint", "cross-attention"]
REASONING_MODES: Tuple[str, ...] = ("knp", "full-joint", "cross-attention")


@dataclass
class RefinerConfig:
    """
    Refiner configuration.

    Attributes:
        neighbors: K, size of each point's neighbour multiset (self included)
        iterations: m, number of refinement iterations
        blocks: Transformer blocks per iteration
        heads: Attention heads
        width: Model width; None means the correlation token width 3·D
        mode: "knp" (K nearest points), "full-joint" (all points) or
            "cross-attention" (points exchange information through learned latent tracks)
        latents: Number of latent tracks used by "cross-attention"
        mlp_ratio: Hidden width of the per-token MLP relative to the model width
        recompute_knn: Rebuild the neighbour index from the current estimate every iteration
    """

    neighbors: int = 10
    iterations: int = 4
    blocks: int = 3
    heads: int = 4
    width: Optional[int] = None
    mode: ReasoningMode = "knp"
    latents: int = 8
    mlp_ratio: int = 2
    recompute_knn: bool = False

    def validate(self, token_width: Optional[int] = None) -> None:
        if self.neighbors < 1:
            raise ConfigError(f"refiner.neighbors must be >= 1, got {self.neighbors}")
        if self.iterations < 1:
            raise ConfigError(f"refiner.iterations must be >= 1, got {self.iterations}")
        if self.blocks < 1 or self.heads < 1 or self.latents < 1 or self.mlp_ratio < 1:
            raise ConfigError("refiner.blocks, heads, latents and mlp_ratio must be positive")
        if self.mode not in REASONING_MODES:
            raise ConfigError(f"refiner.mode: unknown mode '{self.mode}', expected one of {REASONING_MODES}")
        width = self.resolve_width(token_width) if token_width is not None else self.width
        if width is not None and width % self.heads:
            raise ConfigError(f"refiner width {width} is not divisible by {self.heads} heads")

    def resolve_width(self, token_width: int) -> int:
        return self.width if self.width is not None else token_width

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrajectoryState:
    """
    Trajectory estimate for one video.

    Attributes:
        positions: [T, N, 2] (x, y) input-pixel coordinates
        queries: [N, 2] query points
        query_frame: Frame the queries were selected on
    """

    positions: Tensor
    queries: Tensor
    query_frame: int = 0

    def __post_init__(self) -> None:
        if self.positions.ndim != 3 or self.positions.shape[1:] != self.queries.shape:
            raise ShapeError("TrajectoryState", self.positions.shape, self.queries.shape, "expected [T, N, 2] and [N, 2]")

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.positions.data)))

    @classmethod
    def initial(cls, queries: Tensor, n_frames: int, query_frame: int = 0) -> "TrajectoryState":
        """Iteration-0 state: every frame holds the query positions."""
        return cls(broadcast_to(queries, (n_frames,) + queries.shape), queries, query_frame)

    @property
    def n_frames(self) -> int:
        return self.positions.shape[0]

    @property
    def n_points(self) -> int:
        return self.positions.shape[1]

    def numpy(self) -> np.ndarray:
        return self.positions.numpy()


@dataclass
class NeighborIndex:
    """[N, K] point indices; row i starts with i itself."""

    indices: np.ndarray

    @property
    def n_points(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def neighbors_of(self, point: int) -> np.ndarray:
        return self.indices[point]


def knn(queries: np.ndarray, k: int) -> NeighborIndex:
    """
    K nearest points by Euclidean distance, self first.

    Ties are broken by ascending point index. When N < K each row is padded by
    repeating the point itself.

    Args:
        queries: [N, 2] positions
        k: Neighbour count K

    Returns:
        NeighborIndex [N, K]
    """
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != 2 or queries.shape[0] < 1:
        raise ShapeError("knn", queries.shape, (k,), "expected at least one (x, y) point")
    if k < 1:
        raise ConfigError(f"knn: K must be >= 1, got {k}")
    n_points = queries.shape[0]
    distances = cdist(queries, queries)
    np.fill_diagonal(distances, -1.0)
    order = np.argsort(distances, axis=1, kind="stable")[:, : min(k, n_points)]
    if k > n_points:
        pad = np.repeat(np.arange(n_points)[:, None], k - n_points, axis=1)
        order = np.concatenate([order, pad], axis=1)
    return NeighborIndex(order.astype(np.int64))


def all_points(n_points: int) -> NeighborIndex:
    """Neighbour index in which every point attends to every point."""
    return NeighborIndex(np.tile(np.arange(n_points, dtype=np.int64), (n_points, 1)))


def time_encoding(n_frames: int, width: int) -> np.ndarray:
    """Sinusoidal encoding of frame indices, [T, width]."""
    frames = np.arange(n_frames, dtype=np.float64)[:, None]
    pairs = np.arange((width + 1) // 2, dtype=np.float64)[None, :]
    angles = frames / np.power(10000.0, 2.0 * pairs / width)
    encoding = np.zeros((n_frames, width))
    encoding[:, 0::2] = np.sin(angles)
    encoding[:, 1::2] = np.cos(angles[:, : width // 2])
    return encoding


def _split_heads(x: Tensor, heads: int) -> Tensor:
    return reshape(x, x.shape[:-1] + (heads, x.shape[-1] // heads))


def _merge_heads(x: Tensor) -> Tensor:
    return reshape(x, x.shape[:-2] + (x.shape[-2] * x.shape[-1],))


def multihead_attention(queries: Tensor, context: Tensor, params: ModelParams, name: str, heads: int) -> Tensor:
    """
    Scaled dot-product attention of [B, S, W] queries over a [B, S', W] context.

    Returns:
        [B, S, W] after the output projection
    """
    q = _split_heads(linear(queries, params, f"{name}.q"), heads)
    k = _split_heads(linear(context, params, f"{name}.k"), heads)
    v = _split_heads(linear(context, params, f"{name}.v"), heads)
    head_dim = q.shape[-1]
    logits = scale(einsum("bshd,bchd->bhsc", q, k), 1.0 / np.sqrt(head_dim))
    weights = softmax_lastdim(logits)
    out = _merge_heads(einsum("bhsc,bchd->bshd", weights, v))
    return linear(out, params, f"{name}.o")


def neighbor_attention(x: Tensor, nbr: NeighborIndex, params: ModelParams, name: str, heads: int) -> Tensor:
    """
    Attention of each (frame, point) token over the same-frame tokens of its neighbours.

    Args:
        x: Tokens [T, N, W]
        nbr: Neighbour index [N, K]

    Returns:
        [T, N, W]
    """
    q = _split_heads(linear(x, params, f"{name}.q"), heads)
    keys = take(linear(x, params, f"{name}.k"), nbr.indices, axis=1)  # [T, N, K, W]
    values = take(linear(x, params, f"{name}.v"), nbr.indices, axis=1)
    k = _split_heads(keys, heads)
    v = _split_heads(values, heads)
    head_dim = q.shape[-1]
    logits = scale(einsum("tnhd,tnkhd->tnhk", q, k), 1.0 / np.sqrt(head_dim))
    weights = softmax_lastdim(logits)
    out = _merge_heads(einsum("tnhk,tnkhd->tnhd", weights, v))
    return linear(out, params, f"{name}.o")


def _init_attention(params: ModelParams, rng: np.random.Generator, name: str, width: int) -> None:
    for proj in ("q", "k", "v", "o"):
        init_linear(params, rng, f"{name}.{proj}", width, width)


def _init_norm(params: ModelParams, name: str, width: int) -> None:
    params.add(f"{name}.gain", np.ones(width, dtype=get_default_dtype()))
    params.add(f"{name}.bias", zeros((width,)))


def _norm(x: Tensor, params: ModelParams, name: str) -> Tensor:
    return layer_norm_lastdim(x, params[f"{name}.gain"], params[f"{name}.bias"])


class Refiner:
    """Transformer predicting residual trajectory updates from correlation tokens."""

    prefix = "refiner"

    def __init__(self, config: RefinerConfig, token_width: int):
        """
        Initialize a refiner.

        Args:
            config: Refiner configuration
            token_width: Width of the incoming correlation tokens (3·D)
        """
        config.validate(token_width)
        self.config = config
        self.token_width = token_width
        self.width = config.resolve_width(token_width)

    def init_params(self, params: ModelParams, rng: np.random.Generator) -> None:
        cfg, width, p = self.config, self.width, self.prefix
        init_linear(params, rng, f"{p}.embed_corr", self.token_width, width)
        init_linear(params, rng, f"{p}.embed_pos", 2, width)
        if cfg.mode == "cross-attention":
            params.add(f"{p}.latents", 0.02 * rng.standard_normal((cfg.latents, width)).astype(get_default_dtype()))
        for block in range(cfg.blocks):
            name = f"{p}.block{block}"
            _init_norm(params, f"{name}.norm_time", width)
            _init_attention(params, rng, f"{name}.time", width)
            _init_norm(params, f"{name}.norm_space", width)
            if cfg.mode == "cross-attention":
                _init_attention(params, rng, f"{name}.read", width)
                _init_attention(params, rng, f"{name}.write", width)
            else:
                _init_attention(params, rng, f"{name}.space", width)
            _init_norm(params, f"{name}.norm_mlp", width)
            init_linear(params, rng, f"{name}.mlp.fc1", width, cfg.mlp_ratio * width)
            init_linear(params, rng, f"{name}.mlp.fc2", cfg.mlp_ratio * width, width)
        _init_norm(params, f"{p}.norm_out", width)
        init_linear(params, rng, f"{p}.head", width, 2)

    def embed(self, tokens: Tensor, state: TrajectoryState, params: ModelParams) -> Tensor:
        """linear(token) + linear(position − query position) + sinusoidal time encoding."""
        n_frames, n_points = state.n_frames, state.n_points
        offsets = sub(state.positions, broadcast_to(state.queries, (n_frames, n_points, 2)))
        x = add(linear(tokens, params, f"{self.prefix}.embed_corr"), linear(offsets, params, f"{self.prefix}.embed_pos"))
        encoding = np.broadcast_to(time_encoding(n_frames, self.width)[:, None, :], (n_frames, n_points, self.width))
        return add(x, Tensor(encoding, dtype=x.dtype))

    def _time_attention(self, x: Tensor, params: ModelParams, name: str) -> Tensor:
        per_point = transpose(x, (1, 0, 2))  # [N, T, W]
        attended = multihead_attention(per_point, per_point, params, name, self.config.heads)
        return transpose(attended, (1, 0, 2))

    def _cross_attention(self, x: Tensor, params: ModelParams, name: str) -> Tensor:
        n_frames = x.shape[0]
        latents = broadcast_to(params[f"{self.prefix}.latents"], (n_frames,) + params[f"{self.prefix}.latents"].shape)
        latents = add(latents, multihead_attention(latents, x, params, f"{name}.read", self.config.heads))
        return multihead_attention(x, latents, params, f"{name}.write", self.config.heads)

    def _block(self, x: Tensor, nbr: NeighborIndex, params: ModelParams, block: int) -> Tensor:
        name = f"{self.prefix}.block{block}"
        x = add(x, self._time_attention(_norm(x, params, f"{name}.norm_time"), params, f"{name}.time"))
        normed = _norm(x, params, f"{name}.norm_space")
        if self.config.mode == "cross-attention":
            x = add(x, self._cross_attention(normed, params, name))
        else:
            x = add(x, neighbor_attention(normed, nbr, params, f"{name}.space", self.config.heads))
        hidden = relu(linear(_norm(x, params, f"{name}.norm_mlp"), params, f"{name}.mlp.fc1"))
        return add(x, linear(hidden, params, f"{name}.mlp.fc2"))

    def refine_iteration(
        self,
        tokens: Tensor,
        state: TrajectoryState,
        nbr: NeighborIndex,
        params: ModelParams,
    ) -> Tensor:
        """
        Predict the residual update for one iteration.

        Args:
            tokens: Correlation tokens [T, N, 3·D]
            state: Current trajectory estimate
            nbr: Neighbour index used by "knp" and "full-joint"
            params: Model parameters

        Returns:
            Residual [T, N, 2]
        """
        expected = (state.n_frames, state.n_points, self.token_width)
        if tokens.shape != expected:
            raise ShapeError("refine_iteration", tokens.shape, expected, "tokens must be [T, N, 3D]")
        if nbr.n_points != state.n_points:
            raise ShapeError("refine_iteration", nbr.indices.shape, (state.n_points,), "neighbour rows")
        x = self.embed(tokens, state, params)
        for block in range(self.config.blocks):
            x = self._block(x, nbr, params, block)
        x = _norm(x, params, f"{self.prefix}.norm_out")
        return linear(x, params, f"{self.prefix}.head")

    def neighbor_index(self, positions: np.ndarray) -> NeighborIndex:
        """Neighbour index for the configured mode from [N, 2] positions."""
        if self.config.mode == "full-joint":
            return all_points(positions.shape[0])
        return knn(positions, self.config.neighbors)
