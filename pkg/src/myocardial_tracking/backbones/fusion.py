"""Backbones that fuse precomputed per-frame features with their temporal neighbours."""

from typing import Tuple

import numpy as np

from ..autograd import Tensor, add, concat, scale, shift_frames
from ..params import ModelParams, conv, init_conv
from .base import Backbone


class FusionAddBackbone(Backbone):
    """Per-level features averaged with the previous and next frame (zero beyond the clip)."""

    def init_temporal(self, params: ModelParams, rng: np.random.Generator, index: int, width: int) -> None:
        pass

    def temporal(self, params: ModelParams, index: int, block_out: Tensor) -> Tuple[Tensor, Tensor]:
        previous = shift_frames(block_out, -1)
        following = shift_frames(block_out, 1)
        fused = scale(add(add(previous, block_out), following), 1.0 / 3.0)
        return fused, block_out


class FusionCatBackbone(Backbone):
    """Per-level features concatenated with the previous and next frame, projected back by a 1×1 convolution."""

    def init_temporal(self, params: ModelParams, rng: np.random.Generator, index: int, width: int) -> None:
        init_conv(params, rng, f"{self.prefix}.fuse{index}", 1, 3 * width, width)

    def temporal(self, params: ModelParams, index: int, block_out: Tensor) -> Tuple[Tensor, Tensor]:
        stacked = concat([shift_frames(block_out, -1), block_out, shift_frames(block_out, 1)], axis=-1)
        return conv(stacked, params, f"{self.prefix}.fuse{index}"), block_out
