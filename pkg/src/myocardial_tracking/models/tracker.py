"""End-to-end tracker: backbone features, correlation tokens and iterative refinement."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..autograd import Tensor, add, no_record
from ..backbones import Backbone, BackboneConfig, build_backbone
from ..errors import ConfigError
from ..params import ModelParams
from .correlation import CorrConfig, build_tokens, init_corr_encoders
from .refiner import NeighborIndex, Refiner, RefinerConfig, TrajectoryState

logger = logging.getLogger(__name__)


@dataclass
class TrackerConfig:
    """Model configuration: backbone, correlation and refiner sections."""

    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    corr: CorrConfig = field(default_factory=CorrConfig)
    refiner: RefinerConfig = field(default_factory=RefinerConfig)

    def validate(self) -> None:
        self.backbone.validate()
        self.corr.validate()
        self.refiner.validate(self.corr.token_width)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "backbone": {
                "variant": self.backbone.variant,
                "widths": list(self.backbone.widths),
                "strides": list(self.backbone.strides),
                "shift_fraction": self.backbone.shift_fraction,
                "in_channels": self.backbone.in_channels,
            },
            "corr": self.corr.to_dict(),
            "refiner": self.refiner.to_dict(),
        }


class Tracker:
    """
    Myocardial point tracker.

    Iteration 0 copies the query points to every frame; each refinement iteration
    rebuilds correlation tokens along the current estimate and adds the predicted
    residual to the previous estimate.

    Example:
        >>> tracker = Tracker(TrackerConfig())
        >>> params = tracker.init_params(seed=0)
        >>> trajectories = tracker.track(video, queries, params)
    """

    def __init__(self, config: Optional[TrackerConfig] = None):
        self.config = config or TrackerConfig()
        self.config.validate()
        self.backbone: Backbone = build_backbone(self.config.backbone)
        self.refiner = Refiner(self.config.refiner, self.config.corr.token_width)

    def init_params(self, seed: int = 0) -> ModelParams:
        """Create a fresh parameter set; the same seed gives identical values."""
        rng = np.random.default_rng(seed)
        params = ModelParams()
        self.backbone.init_params(params, rng)
        init_corr_encoders(params, rng, self.config.corr)
        self.refiner.init_params(params, rng)
        logger.debug("initialised %d parameter tensors (%d values)", len(params), params.count())
        return params

    def _check_inputs(self, video: Tensor, queries: Tensor, query_frame: int) -> None:
        if video.ndim != 4 or video.shape[0] < 1:
            raise ConfigError(f"video must be [T, H, W, C] with T >= 1, got shape {video.shape}")
        if queries.ndim != 2 or queries.shape[-1] != 2:
            raise ConfigError(f"queries must be [N, 2], got shape {queries.shape}")
        if queries.shape[0] < 1:
            raise ConfigError("query set is empty")
        if not 0 <= query_frame < video.shape[0]:
            raise ConfigError(f"query frame {query_frame} outside [0, {video.shape[0]})")
        height, width = video.shape[1:3]
        xs, ys = queries.data[:, 0], queries.data[:, 1]
        if np.any(xs < 0) or np.any(xs > width - 1) or np.any(ys < 0) or np.any(ys > height - 1):
            raise ConfigError(f"query points must lie inside the {width}x{height} frame")

    def neighbor_index(self, queries: np.ndarray) -> NeighborIndex:
        return self.refiner.neighbor_index(queries)

    def track_tensors(
        self,
        video: Union[Tensor, np.ndarray],
        queries: Union[Tensor, np.ndarray],
        params: ModelParams,
        query_frame: int = 0,
        iterations: Optional[int] = None,
    ) -> List[TrajectoryState]:
        """
        Run all refinement iterations, keeping the graph for training.

        Args:
            video: [T, H, W, C] intensities
            queries: [N, 2] (x, y) points on `query_frame`
            params: Model parameters
            query_frame: Index t_q of the frame the queries were selected on
            iterations: Override of the configured m (0 gives no refinement)

        Returns:
            One state per iteration; empty when iterations is 0
        """
        if not isinstance(video, Tensor):
            video = Tensor(video)
        if not isinstance(queries, Tensor):
            queries = Tensor(queries)
        self._check_inputs(video, queries, query_frame)
        n_iterations = self.config.refiner.iterations if iterations is None else iterations
        if n_iterations < 0:
            raise ConfigError(f"iterations must be >= 0, got {n_iterations}")

        pyramid = self.backbone.extract(video, params)
        state = TrajectoryState.initial(queries, video.shape[0], query_frame)
        nbr = self.neighbor_index(queries.data)
        states: List[TrajectoryState] = []
        for iteration in range(n_iterations):
            if iteration > 0 and self.config.refiner.recompute_knn:
                nbr = self.neighbor_index(state.positions.data[query_frame])
            tokens = build_tokens(pyramid, queries, query_frame, state.positions, self.config.corr, params)
            delta = self.refiner.refine_iteration(tokens, state, nbr, params)
            state = TrajectoryState(add(state.positions, delta), queries, query_frame)
            states.append(state)
        return states

    def track(
        self,
        video: Union[Tensor, np.ndarray],
        queries: Union[Tensor, np.ndarray],
        params: ModelParams,
        query_frame: int = 0,
        iterations: Optional[int] = None,
    ) -> np.ndarray:
        """
        Inference: the final trajectories as a [T, N, 2] array.

        With zero iterations the broadcast initialisation is returned.
        """
        with no_record():
            states = self.track_tensors(video, queries, params, query_frame, iterations)
        if states:
            return states[-1].numpy()
        queries = np.asarray(queries.data if isinstance(queries, Tensor) else queries)
        n_frames = np.shape(video.data if isinstance(video, Tensor) else video)[0]
        return np.repeat(queries[None].astype(np.float64), n_frames, axis=0)

    def describe(self) -> Dict[str, Any]:
        """Settings reported alongside timing results."""
        return {
            "variant": self.config.backbone.variant,
            "window": self.config.corr.window,
            "neighbors": self.config.refiner.neighbors,
            "iterations": self.config.refiner.iterations,
            "mode": self.config.refiner.mode,
        }
