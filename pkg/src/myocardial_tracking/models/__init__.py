"""Correlation, refinement and the end-to-end tracker."""

from .correlation import (
    CorrConfig,
    Corr4D,
    CorrTokens,
    build_tokens,
    corr2d,
    cosine_corr4d,
    encode_corr,
    init_corr_encoders,
    sample_windows,
    window_offsets,
)
from .refiner import (
    REASONING_MODES,
    NeighborIndex,
    ReasoningMode,
    Refiner,
    RefinerConfig,
    TrajectoryState,
    all_points,
    knn,
    time_encoding,
)
from .tracker import Tracker, TrackerConfig

__all__ = [
    "CorrConfig",
    "Corr4D",
    "CorrTokens",
    "build_tokens",
    "corr2d",
    "cosine_corr4d",
    "encode_corr",
    "init_corr_encoders",
    "sample_windows",
    "window_offsets",
    "REASONING_MODES",
    "NeighborIndex",
    "ReasoningMode",
    "Refiner",
    "RefinerConfig",
    "TrajectoryState",
    "all_points",
    "knn",
    "time_encoding",
    "Tracker",
    "TrackerConfig",
]
