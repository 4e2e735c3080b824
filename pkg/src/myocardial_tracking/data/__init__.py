"""Synthetic phantom data and stand-in augmentation."""

from .augment import STAND_IN_LABEL, AugmentConfig, augment, flip_horizontal, jitter_intensity
from .phantom import (
    PhantomSample,
    PhantomSpec,
    cycle_phase,
    deform,
    generate,
    generate_many,
    max_step,
    ood_spec,
    scale_curve,
    wall_points,
)

__all__ = [
    "STAND_IN_LABEL",
    "AugmentConfig",
    "augment",
    "flip_horizontal",
    "jitter_intensity",
    "PhantomSample",
    "PhantomSpec",
    "cycle_phase",
    "deform",
    "generate",
    "generate_many",
    "max_step",
    "ood_spec",
    "scale_curve",
    "wall_points",
]
