"""Tests for the stand-in augmentation."""

import numpy as np

from myocardial_tracking.data import (
    AugmentConfig,
    PhantomSpec,
    augment,
    flip_horizontal,
    generate,
    jitter_intensity,
)

SPEC = PhantomSpec(height=32, width=32, n_frames=6, n_points=4, inner_radius=2.0, outer_radius=13.0, grain=1.5)


def test_flip_mirrors_video_and_points():
    """Test that x maps to W − 1 − x and the frames are mirrored."""
    sample = generate(SPEC, 0)
    flipped = flip_horizontal(sample)
    np.testing.assert_array_equal(flipped.video, sample.video[:, :, ::-1])
    np.testing.assert_allclose(flipped.trajectories[..., 0], 31.0 - sample.trajectories[..., 0])
    np.testing.assert_array_equal(flipped.trajectories[..., 1], sample.trajectories[..., 1])
    np.testing.assert_allclose(flip_horizontal(flipped).trajectories, sample.trajectories)


def test_jitter_stays_in_range():
    """Test that intensities stay in [0, 1] and keep their dtype."""
    sample = generate(SPEC, 1)
    bright = jitter_intensity(sample, 1.5, 0.3)
    assert bright.video.dtype == sample.video.dtype
    assert bright.video.max() <= 1.0 and bright.video.min() >= 0.0
    np.testing.assert_array_equal(bright.trajectories, sample.trajectories)


def test_augment_is_reproducible():
    """Test that equal generator states give equal augmented clips."""
    sample = generate(SPEC, 2)
    first = augment(sample, np.random.default_rng(5))
    second = augment(sample, np.random.default_rng(5))
    np.testing.assert_array_equal(first.video, second.video)
    np.testing.assert_array_equal(first.trajectories, second.trajectories)


def test_augment_always_flips_when_certain():
    """Test the flip probability setting."""
    sample = generate(SPEC, 3)
    config = AugmentConfig(flip_probability=1.0, gain_range=0.0, offset_range=0.0)
    out = augment(sample, np.random.default_rng(0), config)
    np.testing.assert_allclose(out.trajectories, flip_horizontal(sample).trajectories)
