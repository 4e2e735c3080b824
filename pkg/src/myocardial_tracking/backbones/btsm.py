"""Blockwise temporal shift backbone (bTSM-ResNet)."""

from typing import Tuple

import numpy as np

from ..autograd import Tensor
from ..params import ModelParams
from .base import Backbone


class BTSMBackbone(Backbone):
    """
    Blockwise TSM backbone.

    Every block output passes through a single TSM on a side branch that becomes the
    pyramid level; the main flow into the next block stays frame-independent. Each
    level therefore sees ±1 frame.
    """

    def init_temporal(self, params: ModelParams, rng: np.random.Generator, index: int, width: int) -> None:
        self._init_tsm(params, index, width)

    def temporal(self, params: ModelParams, index: int, block_out: Tensor) -> Tuple[Tensor, Tensor]:
        return self._tsm(params, index, block_out), block_out
