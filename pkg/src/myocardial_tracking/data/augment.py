"""
Stand-in training augmentation: horizontal flip and intensity jitter.

This is a simple substitute used to keep the training path exercised. It is not a
motion augmentation strategy and makes no claim of matching one.
"""

from dataclasses import dataclass, replace

import numpy as np

from .phantom import PhantomSample

STAND_IN_LABEL = "stand-in (flip + intensity jitter)"


@dataclass
class AugmentConfig:
    """Probability of a horizontal flip and ranges of the intensity gain and offset."""

    flip_probability: float = 0.5
    gain_range: float = 0.1
    offset_range: float = 0.05


def flip_horizontal(sample: PhantomSample) -> PhantomSample:
    """Mirror the video left-right; x becomes W − 1 − x."""
    width = sample.video.shape[2]
    trajectories = sample.trajectories.copy()
    trajectories[..., 0] = (width - 1) - trajectories[..., 0]
    return replace(sample, video=np.ascontiguousarray(sample.video[:, :, ::-1]), trajectories=trajectories)


def jitter_intensity(sample: PhantomSample, gain: float, offset: float) -> PhantomSample:
    video = np.clip(sample.video * gain + offset, 0.0, 1.0).astype(sample.video.dtype)
    return replace(sample, video=video)


def augment(sample: PhantomSample, rng: np.random.Generator, config: AugmentConfig = AugmentConfig()) -> PhantomSample:
    """Apply the stand-in augmentation with draws from `rng`."""
    if rng.random() < config.flip_probability:
        sample = flip_horizontal(sample)
    gain = 1.0 + rng.uniform(-config.gain_range, config.gain_range)
    offset = rng.uniform(-config.offset_range, config.offset_range)
    return jitter_intensity(sample, gain, offset)
