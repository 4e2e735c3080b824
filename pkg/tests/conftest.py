"""Shared fixtures."""

import logging

import pytest

from myocardial_tracking.autograd import set_default_dtype, set_deterministic


@pytest.fixture(autouse=True)
def reset_runtime():
    """Restore process-wide precision, determinism and log propagation after every test."""
    yield
    set_default_dtype("float32")
    set_deterministic(False)
    logging.getLogger("myocardial_tracking").propagate = True


@pytest.fixture
def micro_tracker_config():
    """Smallest tracker that exercises every stage."""
    from myocardial_tracking.backbones import BackboneConfig
    from myocardial_tracking.models import CorrConfig, RefinerConfig, TrackerConfig

    return TrackerConfig(
        backbone=BackboneConfig(variant="itsm", widths=(8, 8, 8, 8), strides=(1, 2, 2, 4)),
        corr=CorrConfig(window=3, token_dim=4),
        refiner=RefinerConfig(neighbors=2, iterations=2, blocks=1, heads=2),
    )


@pytest.fixture
def micro_run_config():
    """Run configuration small enough for end-to-end tests."""
    from myocardial_tracking.config import RunConfig

    return RunConfig.from_dict(
        {
            "backbone": {"variant": "itsm", "widths": [8, 8, 8, 8], "strides": [1, 2, 2, 4]},
            "corr": {"window": 3, "token_dim": 4},
            "refiner": {"neighbors": 2, "iterations": 2, "blocks": 1, "heads": 2},
            "train": {"epochs": 1, "batch_size": 2, "learning_rate": 1e-3},
            "phantom": {
                "height": 32,
                "width": 32,
                "n_frames": 6,
                "n_points": 4,
                "inner_radius": 2.0,
                "outer_radius": 13.0,
                "grain": 1.5,
            },
            "train_samples": 2,
            "eval_samples": 1,
            "deterministic": True,
        }
    )
