"""
Phantom dataset directories.

    manifest.txt              index<TAB>seed<TAB>video file<TAB>trajectory file, one line per sample
    videos/NNNN.emt2          [T, H, W, 1] float32 video
    gt/NNNN.emt2              [T, N, 2] float64 ground-truth trajectories
"""

import logging
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from ..data import PhantomSample
from ..errors import ContainerFormatError
from .container import load_tensor, save_tensor

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.txt"


def save_phantom_set(directory: Union[str, Path], samples: Sequence[PhantomSample]) -> Path:
    """Write samples and their manifest; equal samples give byte-identical files."""
    directory = Path(directory)
    (directory / "videos").mkdir(parents=True, exist_ok=True)
    (directory / "gt").mkdir(parents=True, exist_ok=True)
    lines = []
    for index, sample in enumerate(samples):
        video_file = f"videos/{index:04d}.emt2"
        gt_file = f"gt/{index:04d}.emt2"
        save_tensor(directory / video_file, sample.video.astype(np.float32))
        save_tensor(directory / gt_file, sample.trajectories.astype(np.float64))
        lines.append(f"{index}\t{sample.seed}\t{video_file}\t{gt_file}\n")
    (directory / MANIFEST_NAME).write_text("".join(lines))
    logger.info("wrote %d phantom samples to %s", len(lines), directory)
    return directory


def load_phantom_set(directory: Union[str, Path]) -> List[PhantomSample]:
    """
    Read a dataset directory written by save_phantom_set.

    Raises:
        FileNotFoundError: If the manifest is missing
        ContainerFormatError: For malformed manifest lines or inconsistent extents
    """
    directory = Path(directory)
    manifest = directory / MANIFEST_NAME
    if not manifest.exists():
        raise FileNotFoundError(f"no phantom manifest at {manifest}")
    samples = []
    for line in manifest.read_text().splitlines():
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ContainerFormatError(f"malformed manifest line: {line!r}")
        _, seed, video_file, gt_file = parts
        video = load_tensor(directory / video_file)
        trajectories = load_tensor(directory / gt_file)
        if video.ndim != 4 or trajectories.ndim != 3 or video.shape[0] != trajectories.shape[0]:
            raise ContainerFormatError(
                f"{video_file} {video.shape} and {gt_file} {trajectories.shape} are not a [T,H,W,C] / [T,N,2] pair"
            )
        samples.append(
            PhantomSample(
                video=video,
                trajectories=trajectories,
                wall_order=np.arange(trajectories.shape[1]),
                seed=int(seed),
            )
        )
    return samples
