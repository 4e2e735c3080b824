"""Trajectory and query files: EMT2 containers or CSV."""

import csv
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from ..errors import ContainerFormatError, ShapeError
from .container import load_tensor, save_tensor

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("t", "i", "x", "y")
QUERY_COLUMNS = ("i", "x", "y")


def write_trajectories_csv(path: Union[str, Path], trajectories: np.ndarray) -> Path:
    """Write [T, N, 2] trajectories as rows t,i,x,y with six decimals."""
    trajectories = np.asarray(trajectories, dtype=np.float64)
    if trajectories.ndim != 3 or trajectories.shape[-1] != 2:
        raise ShapeError("write_trajectories_csv", trajectories.shape, (), "expected [T, N, 2]")
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for t in range(trajectories.shape[0]):
            for i in range(trajectories.shape[1]):
                x, y = trajectories[t, i]
                writer.writerow([t, i, f"{x:.6f}", f"{y:.6f}"])
    return path


def _parse_rows(path: Union[str, Path], reader: Iterable[List[str]], columns: Sequence[str]) -> List[Tuple]:
    """Rows of non-negative integer indices followed by finite (x, y); line numbers count the header."""
    n_index = len(columns) - 2
    rows = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(columns):
            raise ContainerFormatError(f"{path}:{line}: expected {len(columns)} fields, got {len(row)}")
        try:
            indices = tuple(int(value) for value in row[:n_index])
            coords = tuple(float(value) for value in row[n_index:])
        except ValueError:
            raise ContainerFormatError(f"{path}:{line}: malformed row '{','.join(row)}'") from None
        if min(indices) < 0:
            raise ContainerFormatError(f"{path}:{line}: negative index")
        if not np.all(np.isfinite(coords)):
            raise ContainerFormatError(f"{path}:{line}: non-finite coordinate")
        rows.append(indices + coords)
    return rows


def read_trajectories_csv(path: Union[str, Path]) -> np.ndarray:
    """
    Read t,i,x,y rows into a [T, N, 2] array.

    Raises:
        ContainerFormatError: On a wrong header, a malformed row or an incomplete (t, i) grid
    """
    with Path(path).open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRAJECTORY_COLUMNS:
            raise ContainerFormatError(f"{path}: expected header {','.join(TRAJECTORY_COLUMNS)}")
        rows = _parse_rows(path, reader, TRAJECTORY_COLUMNS)
    if not rows:
        raise ContainerFormatError(f"{path}: no trajectory rows")
    n_frames = max(r[0] for r in rows) + 1
    n_points = max(r[1] for r in rows) + 1
    if len(rows) != n_frames * n_points:
        raise ContainerFormatError(f"{path}: {len(rows)} rows do not fill a {n_frames}x{n_points} grid")
    trajectories = np.full((n_frames, n_points, 2), np.nan)
    for t, i, x, y in rows:
        trajectories[t, i] = (x, y)
    if np.isnan(trajectories).any():
        raise ContainerFormatError(f"{path}: duplicate or missing (t, i) rows")
    return trajectories


def read_queries_csv(path: Union[str, Path]) -> np.ndarray:
    """
    Read i,x,y rows into an [N, 2] array ordered by i.

    Raises:
        ContainerFormatError: On a wrong header, a malformed row or indices other than 0..N-1
    """
    with Path(path).open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != QUERY_COLUMNS:
            raise ContainerFormatError(f"{path}: expected header {','.join(QUERY_COLUMNS)}")
        rows = sorted(_parse_rows(path, reader, QUERY_COLUMNS))
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ContainerFormatError(f"{path}: query indices must be 0..N-1")
    return np.array([[x, y] for _, x, y in rows], dtype=np.float64).reshape(-1, 2)


def load_trajectories(path: Union[str, Path]) -> np.ndarray:
    """Load [T, N, 2] trajectories from a .csv file or an EMT2 container."""
    path = Path(path)
    trajectories = read_trajectories_csv(path) if path.suffix.lower() == ".csv" else load_tensor(path)
    if trajectories.ndim != 3 or trajectories.shape[-1] != 2:
        raise ShapeError("load_trajectories", trajectories.shape, (), f"{path} must hold [T, N, 2]")
    return trajectories


def load_queries(path: Union[str, Path]) -> np.ndarray:
    """Load [N, 2] query points from a .csv file or an EMT2 container."""
    path = Path(path)
    queries = read_queries_csv(path) if path.suffix.lower() == ".csv" else load_tensor(path)
    if queries.ndim != 2 or queries.shape[-1] != 2:
        raise ShapeError("load_queries", queries.shape, (), f"{path} must hold [N, 2]")
    return queries


def save_trajectories(path: Union[str, Path], trajectories: np.ndarray) -> Path:
    """Save as CSV when the suffix is .csv, otherwise as a float64 container."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return write_trajectories_csv(path, trajectories)
    return save_tensor(path, np.asarray(trajectories, dtype=np.float64))
