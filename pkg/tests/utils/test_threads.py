"""Tests for worker sizing and the ordered map."""

import pytest

from myocardial_tracking.autograd import set_deterministic
from myocardial_tracking.errors import ConfigError
from myocardial_tracking.utils.threads import THREADS_ENV, num_workers, ordered_map


def test_explicit_request_wins(monkeypatch):
    """Test precedence of an explicit count over the environment."""
    monkeypatch.setenv(THREADS_ENV, "3")
    assert num_workers(2) == 2
    assert num_workers() == 3


def test_deterministic_mode_forces_one_worker(monkeypatch):
    """Test that deterministic runs never fan out."""
    monkeypatch.setenv(THREADS_ENV, "8")
    set_deterministic(True)
    assert num_workers() == 1
    assert num_workers(4) == 1


@pytest.mark.parametrize("raw", ["zero", "0", "-2"])
def test_invalid_environment(monkeypatch, raw):
    """Test malformed thread counts in the environment."""
    monkeypatch.setenv(THREADS_ENV, raw)
    with pytest.raises(ConfigError):
        num_workers()


def test_invalid_request():
    """Test a non-positive explicit count."""
    with pytest.raises(ConfigError):
        num_workers(0)


def test_ordered_map_keeps_order_across_threads():
    """Test that results follow the input order with several workers."""
    assert ordered_map(lambda x: x * x, range(50), workers=4) == [x * x for x in range(50)]
    assert ordered_map(lambda x: x, [], workers=4) == []
