"""Injected temporal shift backbone (iTSM-ResNet)."""

from typing import Tuple

import numpy as np

from ..autograd import Tensor
from ..params import ModelParams
from .base import Backbone


class ITSMBackbone(Backbone):
    """
    Injected TSM backbone.

    A TSM follows each of the first three blocks and its output feeds the next block,
    so the temporal receptive field grows by one frame per block: ±1, ±2, ±3 and ±3
    frames at F^(1..4). The deepest block has no TSM.
    """

    def init_temporal(self, params: ModelParams, rng: np.random.Generator, index: int, width: int) -> None:
        if index < 3:
            self._init_tsm(params, index, width)

    def temporal(self, params: ModelParams, index: int, block_out: Tensor) -> Tuple[Tensor, Tensor]:
        if index < 3:
            shifted = self._tsm(params, index, block_out)
            return shifted, shifted
        return block_out, block_out
