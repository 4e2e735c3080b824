"""Iteration-weighted L1 trajectory loss."""

from typing import Sequence, Union

import numpy as np

from ..autograd import Tensor, absolute, mean_all, stack_scalars, sub
from ..errors import ConfigError
from ..models import TrajectoryState

Prediction = Union[Tensor, TrajectoryState]


def iteration_weights(iterations: int, gamma: float) -> np.ndarray:
    """
    Weights γ^(m−i)/m for i = 1..m.

    The last iteration has weight 1/m; they sum to (1 − γ^m) / (m·(1 − γ)) for γ < 1.
    """
    if iterations < 1:
        raise ConfigError(f"loss needs at least one iteration, got {iterations}")
    if not 0.0 < gamma <= 1.0:
        raise ConfigError(f"gamma must be in (0, 1], got {gamma}")
    exponents = np.arange(iterations - 1, -1, -1, dtype=np.float64)
    return gamma ** exponents / iterations


def l1_error(prediction: Tensor, target: Union[Tensor, np.ndarray]) -> Tensor:
    """Mean absolute error over frames, points and coordinates, in pixels."""
    if not isinstance(target, Tensor):
        target = Tensor(target, dtype=prediction.dtype)
    return mean_all(absolute(sub(prediction, target)))


def sequence_loss(states: Sequence[Prediction], target: Union[Tensor, np.ndarray], gamma: float = 0.8) -> Tensor:
    """
    Sum over iterations i = 1..m of γ^(m−i) / m times the L1 error of estimate i.

    Args:
        states: Per-iteration estimates, first to last, each [T, N, 2]
        target: Ground truth [T, N, 2]
        gamma: Exponential weighting factor

    Returns:
        Scalar loss tensor
    """
    predictions = [s.positions if isinstance(s, TrajectoryState) else s for s in states]
    weights = iteration_weights(len(predictions), gamma)
    errors = [l1_error(p, target) for p in predictions]
    return stack_scalars(errors, [float(w) for w in weights])
