"""File formats: EMT2 containers, checkpoints and trajectory files."""

from .checkpoint import IndexEntry, load_arrays, load_checkpoint, read_index, save_checkpoint
from .container import MAGIC, VERSION, decode, encode, load_tensor, save_tensor
from .dataset import MANIFEST_NAME, load_phantom_set, save_phantom_set
from .trajectories import (
    load_queries,
    load_trajectories,
    read_queries_csv,
    read_trajectories_csv,
    save_trajectories,
    write_trajectories_csv,
)

__all__ = [
    "IndexEntry",
    "load_arrays",
    "load_checkpoint",
    "read_index",
    "save_checkpoint",
    "MANIFEST_NAME",
    "load_phantom_set",
    "save_phantom_set",
    "MAGIC",
    "VERSION",
    "decode",
    "encode",
    "load_tensor",
    "save_tensor",
    "load_queries",
    "load_trajectories",
    "read_queries_csv",
    "read_trajectories_csv",
    "save_trajectories",
    "write_trajectories_csv",
]
