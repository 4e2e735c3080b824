"""Frame-independent residual backbone."""

from typing import Tuple

import numpy as np

from ..autograd import Tensor
from ..params import ModelParams
from .base import Backbone


class PlainBackbone(Backbone):
    """No temporal mixing: every frame is processed on its own."""

    def init_temporal(self, params: ModelParams, rng: np.random.Generator, index: int, width: int) -> None:
        pass

    def temporal(self, params: ModelParams, index: int, block_out: Tensor) -> Tuple[Tensor, Tensor]:
        return block_out, block_out
