"""Tests for the synthetic phantom."""

import dataclasses

import numpy as np
import pytest

from myocardial_tracking.data import (
    PhantomSpec,
    cycle_phase,
    generate,
    generate_many,
    max_step,
    ood_spec,
    scale_curve,
    wall_points,
)
from myocardial_tracking.autograd import Tensor, bilinear_sample, no_record
from myocardial_tracking.errors import PhantomSpecError
from myocardial_tracking.metrics import gls

SMALL = PhantomSpec(height=32, width=32, n_frames=6, n_points=4, inner_radius=2.0, outer_radius=13.0, grain=1.5)


def test_sample_layout():
    """Test video and trajectory extents, value range and wall order."""
    sample = generate(SMALL, 3)
    assert sample.video.shape == (6, 32, 32, 1)
    assert sample.video.dtype == np.float32
    assert sample.video.min() >= 0.0 and sample.video.max() <= 1.0
    assert sample.trajectories.shape == (6, 4, 2)
    np.testing.assert_array_equal(sample.wall_order, np.arange(4))
    np.testing.assert_array_equal(sample.queries, sample.trajectories[0])
    assert sample.seed == 3 and sample.query_frame == 0


def test_trajectories_close_over_the_cycle():
    """Test that every point returns to its start at the last frame."""
    sample = generate(PhantomSpec(), 0)
    np.testing.assert_allclose(sample.trajectories[-1], sample.trajectories[0], atol=1e-12)


def test_inter_frame_step_is_bounded():
    """Test the L1 local-motion bound a·R_outer·π/T for several geometries."""
    for spec in (PhantomSpec(), SMALL, PhantomSpec(n_frames=8, n_points=8), PhantomSpec(amplitude=0.3, n_frames=24)):
        trajectories = generate(spec, 1).trajectories
        step = np.abs(np.diff(trajectories, axis=0)).sum(axis=-1).max()
        assert max_step(trajectories) == pytest.approx(step)
        assert step <= spec.displacement_bound() + 1e-9
        assert step <= spec.worst_case_step() + 1e-9


def test_same_seed_is_bit_identical():
    """Test that generation is a pure function of the spec and seed."""
    first, second = generate(SMALL, 7), generate(SMALL, 7)
    np.testing.assert_array_equal(first.video, second.video)
    np.testing.assert_array_equal(first.trajectories, second.trajectories)
    assert not np.array_equal(first.video, generate(SMALL, 8).video)


def test_zero_amplitude_is_static():
    """Test that a = 0 freezes every trajectory and gives zero strain."""
    sample = generate(dataclasses.replace(SMALL, amplitude=0.0), 0)
    np.testing.assert_array_equal(sample.trajectories, np.repeat(sample.trajectories[:1], 6, axis=0))
    assert gls(sample.trajectories, sample.wall_order).peak_gls == 0.0


def test_scale_only_wall_strain_matches_amplitude():
    """Test peak GLS (min s − 1)·100 = −18 % for a scale-only phantom with a = 0.18."""
    spec = PhantomSpec(amplitude=0.18, scale_only=True, n_frames=17)
    trajectories = generate(spec, 0).trajectories
    assert scale_curve(spec).min() == pytest.approx(0.82)
    assert gls(trajectories).peak_gls == pytest.approx(-18.0, abs=0.1)


def test_points_lie_on_the_mid_wall():
    """Test that reference points sit on the mid-wall circle, ordered along an open arc."""
    spec = PhantomSpec()
    points = wall_points(spec)
    np.testing.assert_allclose(np.linalg.norm(points - spec.centre, axis=-1), spec.mid_radius)
    gaps = np.linalg.norm(np.diff(points, axis=0), axis=-1)
    np.testing.assert_allclose(gaps, gaps[0])
    assert np.linalg.norm(points[-1] - points[0]) > gaps[0]


def test_cycle_phase_endpoints():
    """Test zero phase at both ends and unit phase mid-cycle for odd T."""
    phase = cycle_phase(9)
    assert phase[0] == 0.0 and phase[-1] == 0.0
    assert phase[4] == pytest.approx(1.0)


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"n_frames": 1}, "n_frames"),
        ({"n_points": 0}, "n_points"),
        ({"amplitude": 0.5}, "amplitude"),
        ({"inner_radius": 30.0}, "radii"),
        ({"outer_radius": 40.0}, "does not fit"),
        ({"grain": 0.0}, "grain"),
        ({"arc_degrees": 0.0}, "arc_degrees"),
        ({"n_frames": 4, "amplitude": 0.3, "inner_radius": 22.0}, "local-motion"),
        ({"inner_radius": 8.0, "outer_radius": 24.0}, "local-motion"),
    ],
)
def test_invalid_specs(changes, message):
    """Test that every violated invariant raises PhantomSpecError."""
    with pytest.raises(PhantomSpecError, match=message):
        generate(dataclasses.replace(PhantomSpec(), **changes))


def test_generate_many_follows_seeds():
    """Test seeds seed, seed + 1, ... in output order, with threads."""
    samples = generate_many(SMALL, 3, 10, workers=2)
    assert [s.seed for s in samples] == [10, 11, 12]
    np.testing.assert_array_equal(samples[1].video, generate(SMALL, 11).video)
    assert generate_many(SMALL, 0) == []
    with pytest.raises(PhantomSpecError):
        generate_many(SMALL, -1)


def test_ood_spec_shifts_appearance():
    """Test that the out-of-distribution variant changes geometry and texture but stays valid."""
    spec = PhantomSpec()
    shifted = ood_spec(spec)
    assert shifted.inner_radius < spec.inner_radius
    assert shifted.outer_radius > spec.outer_radius
    assert shifted.grain > spec.grain and shifted.noise > spec.noise
    assert shifted.seed != spec.seed
    assert generate(shifted, 0).video.shape == (spec.n_frames, spec.height, spec.width, 1)


def test_texture_rides_with_tissue():
    """Test that without noise the intensity sampled along a true trajectory stays at its first value."""
    for spec in (dataclasses.replace(PhantomSpec(), noise=0.0), dataclasses.replace(SMALL, noise=0.0)):
        sample = generate(spec, 4)
        values = []
        with no_record():
            for t in range(spec.n_frames):
                frame = Tensor(sample.video[t], dtype=np.float64)
                rows_cols = Tensor(sample.trajectories[t][:, ::-1].copy(), dtype=np.float64)
                values.append(bilinear_sample(frame, rows_cols).data[:, 0])
        values = np.stack(values)
        assert np.abs(values - values[0]).max() <= 0.05
