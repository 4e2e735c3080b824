"""Tests for checkpoint directories."""

import dataclasses

import numpy as np
import pytest

from myocardial_tracking.errors import ConfigError
from myocardial_tracking.io import load_checkpoint, read_index, save_checkpoint
from myocardial_tracking.models import Tracker
from myocardial_tracking.training import AdamW, OptimState


def directory_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_parameters_round_trip(micro_tracker_config, tmp_path):
    """Test that loading restores every parameter in registration order."""
    tracker = Tracker(micro_tracker_config)
    params = tracker.init_params(3)
    save_checkpoint(tmp_path, params)
    entries = read_index(tmp_path)
    assert [e.name for e in entries] == params.names()
    assert entries[0].file == "params/0000.emt2"

    restored = tracker.init_params(9)
    state = load_checkpoint(tmp_path, restored)
    assert state.step == 0
    for name, values in params.arrays().items():
        np.testing.assert_array_equal(restored[name].data, values)


def test_optimizer_state_round_trip(micro_tracker_config, tmp_path):
    """Test moments and the step counter."""
    tracker = Tracker(micro_tracker_config)
    params = tracker.init_params(0)
    state = OptimState.zeros_like(params)
    grads = {name: np.full(t.shape, 0.1) for name, t in params.items()}
    AdamW().step(params, grads, state, lr=1e-3)
    save_checkpoint(tmp_path, params, state)

    loaded = load_checkpoint(tmp_path, tracker.init_params(0))
    assert loaded.step == 1
    for name in params.names():
        np.testing.assert_array_equal(loaded.first_moment[name], state.first_moment[name])
        np.testing.assert_array_equal(loaded.second_moment[name], state.second_moment[name])


def test_saving_twice_is_byte_identical(micro_tracker_config, tmp_path):
    """Test that equal parameters give identical checkpoint files."""
    tracker = Tracker(micro_tracker_config)
    save_checkpoint(tmp_path / "a", tracker.init_params(2))
    save_checkpoint(tmp_path / "b", tracker.init_params(2))
    assert directory_bytes(tmp_path / "a") == directory_bytes(tmp_path / "b")


def test_mismatched_model_rejected(micro_tracker_config, tmp_path):
    """Test loading into a differently configured model."""
    save_checkpoint(tmp_path, Tracker(micro_tracker_config).init_params(0))
    wider = dataclasses.replace(micro_tracker_config, corr=dataclasses.replace(micro_tracker_config.corr, token_dim=6))
    with pytest.raises(ConfigError):
        load_checkpoint(tmp_path, Tracker(wider).init_params(0))


def test_missing_index(tmp_path):
    """Test that a directory without an index is reported."""
    with pytest.raises(FileNotFoundError):
        read_index(tmp_path)
