"""Tests for trajectory and query files."""

import numpy as np
import pytest

from myocardial_tracking.errors import ContainerFormatError, ShapeError
from myocardial_tracking.io import (
    load_queries,
    load_trajectories,
    save_trajectories,
    save_tensor,
    write_trajectories_csv,
)


def test_csv_layout(tmp_path):
    """Test columns t,i,x,y and six-decimal formatting."""
    trajectories = np.array([[[1.0, 2.5], [3.25, 4.0]], [[1.1234567, 2.0], [0.0, -1.0]]])
    path = write_trajectories_csv(tmp_path / "tracks.csv", trajectories)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,i,x,y"
    assert lines[1] == "0,0,1.000000,2.500000"
    assert lines[3] == "1,0,1.123457,2.000000"
    assert len(lines) == 5


def test_csv_and_container_loading(tmp_path):
    """Test that both file kinds load to [T, N, 2]."""
    trajectories = np.random.default_rng(0).uniform(0, 64, size=(3, 4, 2)).round(6)
    csv_path = save_trajectories(tmp_path / "t.csv", trajectories)
    bin_path = save_trajectories(tmp_path / "t.emt2", trajectories)
    np.testing.assert_allclose(load_trajectories(csv_path), trajectories, atol=1e-9)
    np.testing.assert_array_equal(load_trajectories(bin_path), trajectories)


def test_csv_rows_must_fill_the_grid(tmp_path):
    """Test missing rows and a wrong header."""
    path = tmp_path / "bad.csv"
    path.write_text("t,i,x,y\n0,0,1,1\n0,1,2,2\n1,0,3,3\n")
    with pytest.raises(ContainerFormatError):
        load_trajectories(path)
    path.write_text("frame,point,x,y\n0,0,1,1\n")
    with pytest.raises(ContainerFormatError, match="header"):
        load_trajectories(path)


def test_queries_from_csv_and_container(tmp_path):
    """Test query files sorted by index and the [N, 2] shape check."""
    path = tmp_path / "q.csv"
    path.write_text("i,x,y\n1,5.0,6.0\n0,1.5,2.5\n")
    np.testing.assert_array_equal(load_queries(path), [[1.5, 2.5], [5.0, 6.0]])
    path.write_text("i,x,y\n0,1,1\n2,3,3\n")
    with pytest.raises(ContainerFormatError):
        load_queries(path)
    bad = save_tensor(tmp_path / "q.emt2", np.zeros((2, 3)))
    with pytest.raises(ShapeError):
        load_queries(bad)


@pytest.mark.parametrize(
    "row, message",
    [
        ("0,0,1.5", "expected 4 fields"),
        ("0,zero,1.5,2.0", "malformed row"),
        ("0,0,1.5,abc", "malformed row"),
        ("0,0.5,1.5,2.0", "malformed row"),
        ("-1,0,1.5,2.0", "negative index"),
        ("0,0,nan,2.0", "non-finite"),
        ("0,0,1.5,inf", "non-finite"),
    ],
)
def test_malformed_trajectory_rows(tmp_path, row, message):
    """Test that a bad row is a format error naming the file line."""
    path = tmp_path / "tracks.csv"
    path.write_text(f"t,i,x,y\n0,1,3.0,4.0\n{row}\n")
    with pytest.raises(ContainerFormatError, match=f"tracks.csv:3: {message}"):
        load_trajectories(path)


@pytest.mark.parametrize("row", ["1,2.0", "one,2.0,3.0", "-1,2.0,3.0", "1,2.0,nan"])
def test_malformed_query_rows(tmp_path, row):
    """Test that query rows get the same checks as trajectory rows."""
    path = tmp_path / "queries.csv"
    path.write_text(f"i,x,y\n0,1.0,1.0\n{row}\n")
    with pytest.raises(ContainerFormatError, match="queries.csv:3"):
        load_queries(path)


def test_blank_lines_are_skipped(tmp_path):
    """Test that empty lines between rows are ignored."""
    path = tmp_path / "queries.csv"
    path.write_text("i,x,y\n\n1,3.0,4.0\n\n0,1.0,2.0\n")
    np.testing.assert_array_equal(load_queries(path), [[1.0, 2.0], [3.0, 4.0]])
