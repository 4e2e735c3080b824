"""
EMT2 tensor container.

Layout (all integers little-endian):
    magic    4 bytes  b"EMT2"
    version  u16      1
    dtype    u8       1 = float32, 2 = float64
    rank     u8
    extents  rank × u64
    payload  row-major values, little-endian
"""

import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import ContainerFormatError

logger = logging.getLogger(__name__)

MAGIC = b"EMT2"
VERSION = 1
DTYPE_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_CODES_BY_SIZE = {4: 1, 8: 2}
_HEADER = struct.Struct("<4sHBB")

PathLike = Union[str, Path]


def encode(array: np.ndarray) -> bytes:
    """
    Serialise a float32 or float64 array.

    Raises:
        ContainerFormatError: For other dtypes or ranks above 255
    """
    array = np.asarray(array)
    code = _CODES_BY_SIZE.get(array.dtype.itemsize) if array.dtype.kind == "f" else None
    if code is None:
        raise ContainerFormatError(f"unsupported dtype {array.dtype}; expected float32 or float64")
    if array.ndim > 255:
        raise ContainerFormatError(f"rank {array.ndim} exceeds 255")
    header = _HEADER.pack(MAGIC, VERSION, code, array.ndim)
    extents = struct.pack(f"<{array.ndim}Q", *array.shape)
    payload = np.ascontiguousarray(array, dtype=DTYPE_CODES[code]).tobytes(order="C")
    return header + extents + payload


def decode(blob: bytes) -> np.ndarray:
    """
    Parse a container.

    Raises:
        ContainerFormatError: On bad magic, unknown version or dtype code, or a payload
            whose length disagrees with the extents
    """
    if len(blob) < _HEADER.size:
        raise ContainerFormatError(f"truncated header: {len(blob)} bytes")
    magic, version, code, rank = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ContainerFormatError(f"unsupported container version {version}")
    if code not in DTYPE_CODES:
        raise ContainerFormatError(f"unknown dtype code {code}")
    offset = _HEADER.size
    extents_size = 8 * rank
    if len(blob) < offset + extents_size:
        raise ContainerFormatError("truncated extents")
    shape = struct.unpack_from(f"<{rank}Q", blob, offset)
    offset += extents_size
    dtype = DTYPE_CODES[code]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(blob) - offset != expected:
        raise ContainerFormatError(f"payload holds {len(blob) - offset} bytes, extents {shape} need {expected}")
    values = np.frombuffer(blob, dtype=dtype, offset=offset, count=expected // dtype.itemsize)
    return values.reshape(shape).astype(dtype.newbyteorder("="), copy=True)


def save_tensor(path: PathLike, array: np.ndarray) -> Path:
    """Write one array to `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode(array))
    logger.debug("wrote %s %s", path, tuple(np.shape(array)))
    return path


def load_tensor(path: PathLike) -> np.ndarray:
    """Read one array from `path`."""
    return decode(Path(path).read_bytes())
