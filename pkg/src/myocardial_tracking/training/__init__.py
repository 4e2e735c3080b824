"""Loss, optimizer and training loop."""

from .loss import iteration_weights, l1_error, sequence_loss
from .optim import AdamW, OptimState, one_cycle_lr, optimizer_step
from .trainer import Prefetcher, TrainConfig, TrainResult, crop_sample, sample_gradients, save_loss_curve, train

__all__ = [
    "iteration_weights",
    "l1_error",
    "sequence_loss",
    "AdamW",
    "OptimState",
    "one_cycle_lr",
    "optimizer_step",
    "Prefetcher",
    "TrainConfig",
    "TrainResult",
    "crop_sample",
    "sample_gradients",
    "save_loss_curve",
    "train",
]
