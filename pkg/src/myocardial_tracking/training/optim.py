"""AdamW with decoupled weight decay and a one-cycle learning-rate schedule."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from ..errors import ConfigError, NonFiniteGradientError
from ..params import ModelParams

logger = logging.getLogger(__name__)


def one_cycle_lr(
    step: int,
    total_steps: int,
    max_lr: float,
    warmup_fraction: float = 0.1,
    start_div: float = 25.0,
    final_div: float = 100.0,
) -> float:
    """
    Learning rate at `step` of a one-cycle schedule.

    Linear ramp from max_lr/start_div to max_lr over the first warmup_fraction of the
    steps, then cosine decay to max_lr/final_div at the last step.
    """
    if total_steps < 1:
        raise ConfigError(f"total_steps must be >= 1, got {total_steps}")
    step = min(max(step, 0), total_steps - 1)
    start, floor = max_lr / start_div, max_lr / final_div
    warmup = int(round(warmup_fraction * total_steps))
    if step < warmup:
        return start + (max_lr - start) * step / warmup
    decay_steps = max(total_steps - 1 - warmup, 1)
    progress = (step - warmup) / decay_steps
    return floor + (max_lr - floor) * 0.5 * (1.0 + np.cos(np.pi * progress))


@dataclass
class OptimState:
    """First and second moments per parameter plus the number of completed steps."""

    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "OptimState":
        return cls(
            first_moment={name: np.zeros_like(t.data) for name, t in params.items()},
            second_moment={name: np.zeros_like(t.data) for name, t in params.items()},
        )

    def check_matches(self, params: ModelParams) -> None:
        if list(self.first_moment) != params.names() or list(self.second_moment) != params.names():
            raise ConfigError("optimizer state does not match the parameter names")
        for name, tensor in params.items():
            if self.first_moment[name].shape != tensor.shape or self.second_moment[name].shape != tensor.shape:
                raise ConfigError(f"optimizer state shape mismatch for '{name}'")


@dataclass
class AdamW:
    """
    Adaptive-moment optimizer with decoupled weight decay.

    Attributes:
        betas: Decay rates of the first and second moment estimates
        eps: Denominator guard
        weight_decay: Decoupled decay coefficient λ
    """

    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 1e-4

    def step(self, params: ModelParams, grads: Mapping[str, np.ndarray], state: OptimState, lr: float) -> None:
        """
        Apply one update in place.

        Raises:
            NonFiniteGradientError: If any gradient holds NaN or inf; nothing is updated
        """
        for name in params:
            grad = grads[name]
            bad = int(np.size(grad) - np.count_nonzero(np.isfinite(grad)))
            if bad:
                raise NonFiniteGradientError(name, bad, int(np.size(grad)))

        beta1, beta2 = self.betas
        state.step += 1
        correction1 = 1.0 - beta1 ** state.step
        correction2 = 1.0 - beta2 ** state.step
        for name, tensor in params.items():
            grad = np.asarray(grads[name], dtype=np.float64)
            m = beta1 * state.first_moment[name] + (1.0 - beta1) * grad
            v = beta2 * state.second_moment[name] + (1.0 - beta2) * grad * grad
            state.first_moment[name] = m.astype(tensor.dtype)
            state.second_moment[name] = v.astype(tensor.dtype)
            value = tensor.data.astype(np.float64)
            update = (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            params.assign(name, value - lr * (update + self.weight_decay * value))


def optimizer_step(
    params: ModelParams,
    grads: Mapping[str, np.ndarray],
    state: OptimState,
    lr: float,
    weight_decay: float = 1e-4,
) -> None:
    """One AdamW update with the default moment settings."""
    AdamW(weight_decay=weight_decay).step(params, grads, state, lr)
