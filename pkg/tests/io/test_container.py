"""Tests for the EMT2 tensor container."""

import struct

import numpy as np
import pytest

from myocardial_tracking.errors import ContainerFormatError
from myocardial_tracking.io import MAGIC, decode, encode, load_tensor, save_tensor


def test_header_layout():
    """Test magic, version, dtype code, rank and extents."""
    blob = encode(np.zeros((2, 3), dtype=np.float32))
    magic, version, code, rank = struct.unpack_from("<4sHBB", blob, 0)
    assert (magic, version, code, rank) == (MAGIC, 1, 1, 2)
    assert struct.unpack_from("<2Q", blob, 8) == (2, 3)
    assert len(blob) == 8 + 16 + 6 * 4


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_values_and_dtype_survive(dtype):
    """Test that values, extents and dtype come back unchanged."""
    array = np.random.default_rng(0).standard_normal((3, 1, 4)).astype(dtype)
    restored = decode(encode(array))
    assert restored.dtype == dtype
    np.testing.assert_array_equal(restored, array)


def test_scalar_array():
    """Test a rank-0 array."""
    restored = decode(encode(np.float64(2.5)))
    assert restored.shape == () and restored == 2.5


def test_file_round_trip_is_byte_identical(tmp_path):
    """Test that re-encoding a loaded file reproduces its bytes."""
    path = save_tensor(tmp_path / "nested" / "a.emt2", np.arange(12.0).reshape(3, 4))
    assert encode(load_tensor(path)) == path.read_bytes()


def test_rejects_other_dtypes():
    """Test that integer arrays cannot be stored."""
    with pytest.raises(ContainerFormatError, match="dtype"):
        encode(np.arange(3))


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda b: b"XXXX" + b[4:], "magic"),
        (lambda b: b[:4] + struct.pack("<H", 2) + b[6:], "version"),
        (lambda b: b[:6] + bytes([9]) + b[7:], "dtype code"),
        (lambda b: b[:-4], "payload"),
        (lambda b: b + b"\x00", "payload"),
        (lambda b: b[:5], "truncated"),
        (lambda b: b[:12], "truncated"),
    ],
)
def test_malformed_blobs(mutate, message):
    """Test that corrupted containers raise ContainerFormatError."""
    blob = encode(np.ones((2, 2), dtype=np.float32))
    with pytest.raises(ContainerFormatError, match=message):
        decode(mutate(blob))
