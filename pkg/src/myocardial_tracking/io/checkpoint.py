"""
Checkpoint directories.

    index.txt                 name<TAB>file<TAB>shape per parameter, registration order
    params/NNNN.emt2          parameter values
    optim/m_NNNN.emt2         AdamW first moments (when saved with optimizer state)
    optim/v_NNNN.emt2         AdamW second moments
    state.json                optimizer step counter
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..errors import ConfigError, ContainerFormatError
from ..params import ModelParams
from ..training import OptimState
from .container import load_tensor, save_tensor

logger = logging.getLogger(__name__)

INDEX_NAME = "index.txt"
STATE_NAME = "state.json"


@dataclass
class IndexEntry:
    name: str
    file: str
    shape: Tuple[int, ...]

    def line(self) -> str:
        return f"{self.name}\t{self.file}\t{'x'.join(str(s) for s in self.shape)}"

    @classmethod
    def parse(cls, line: str) -> "IndexEntry":
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 3:
            raise ContainerFormatError(f"malformed index line: {line!r}")
        name, file, shape = parts
        extents = tuple(int(s) for s in shape.split("x")) if shape else ()
        return cls(name, file, extents)


def save_checkpoint(
    directory: Union[str, Path],
    params: ModelParams,
    optim_state: Optional[OptimState] = None,
) -> Path:
    """
    Write parameters (and optionally optimizer state) into `directory`.

    Saving the same values twice produces byte-identical files.
    """
    directory = Path(directory)
    (directory / "params").mkdir(parents=True, exist_ok=True)
    entries: List[IndexEntry] = []
    for position, (name, tensor) in enumerate(params.items()):
        file = f"params/{position:04d}.emt2"
        save_tensor(directory / file, tensor.data)
        entries.append(IndexEntry(name, file, tensor.shape))
    (directory / INDEX_NAME).write_text("".join(e.line() + "\n" for e in entries))

    state = {"step": 0 if optim_state is None else int(optim_state.step), "has_optimizer": optim_state is not None}
    if optim_state is not None:
        (directory / "optim").mkdir(exist_ok=True)
        for position, name in enumerate(params.names()):
            save_tensor(directory / f"optim/m_{position:04d}.emt2", optim_state.first_moment[name])
            save_tensor(directory / f"optim/v_{position:04d}.emt2", optim_state.second_moment[name])
    (directory / STATE_NAME).write_text(json.dumps(state, indent=2, sort_keys=True) + "\n")
    logger.info("saved checkpoint with %d tensors to %s", len(entries), directory)
    return directory


def read_index(directory: Union[str, Path]) -> List[IndexEntry]:
    path = Path(directory) / INDEX_NAME
    if not path.exists():
        raise FileNotFoundError(f"no checkpoint index at {path}")
    return [IndexEntry.parse(line) for line in path.read_text().splitlines() if line]


def load_arrays(directory: Union[str, Path]) -> Dict[str, np.ndarray]:
    """Parameter arrays by name, in index order."""
    directory = Path(directory)
    arrays = {}
    for entry in read_index(directory):
        values = load_tensor(directory / entry.file)
        if values.shape != entry.shape:
            raise ContainerFormatError(f"{entry.file}: extents {values.shape} differ from index {entry.shape}")
        arrays[entry.name] = values
    return arrays


def load_checkpoint(directory: Union[str, Path], params: ModelParams) -> OptimState:
    """
    Load a checkpoint into `params`, whose names and shapes must match it.

    Args:
        directory: Checkpoint directory
        params: Parameter set built from the run configuration (overwritten)

    Returns:
        The saved optimizer state, or a fresh one at the saved step when none was stored

    Raises:
        ConfigError: If the checkpoint was written for a different model configuration
    """
    directory = Path(directory)
    arrays = load_arrays(directory)
    if list(arrays) != params.names():
        raise ConfigError(f"checkpoint {directory} does not match the configured model parameters")
    try:
        params.load_arrays(arrays)
    except ValueError as exc:
        raise ConfigError(f"checkpoint {directory} does not match the configured model: {exc}") from exc

    state_path = directory / STATE_NAME
    state = json.loads(state_path.read_text()) if state_path.exists() else {"step": 0, "has_optimizer": False}
    optim_state = OptimState.zeros_like(params)
    optim_state.step = int(state.get("step", 0))
    if state.get("has_optimizer"):
        for position, name in enumerate(params.names()):
            optim_state.first_moment[name] = load_tensor(directory / f"optim/m_{position:04d}.emt2")
            optim_state.second_moment[name] = load_tensor(directory / f"optim/v_{position:04d}.emt2")
        optim_state.check_matches(params)
    return optim_state
