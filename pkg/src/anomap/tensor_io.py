"""DADF tensor container: the on-disk interchange format for embeddings,
patch-feature grids, masks, and anomaly maps.

Layout (all little-endian, independent of host byte order):

    offset  size          field
    0       4             magic "DADF"
    4       4             u32 version (currently 1)
    8       1             u8 dtype code (1 = float32, the only dtype)
    9       1             u8 ndim (1, 2 or 3)
    10      2             zero padding
    12      8 * ndim      u64 dims
    ...     4 * prod(dims) row-major float32 payload

Non-finite values are rejected on both write and read: every consumer
downstream (cosine similarity, k-means) is undefined on NaN/Inf.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError

MAGIC = b"DADF"
VERSION = 1
DTYPE_F32 = 1

_HEADER = struct.Struct("<4sIBB2x")


def write_tensor(data: np.ndarray, path: str | Path) -> None:
    """Serialize a 1-3 dimensional float array to `path` in DADF layout."""
    arr = np.asarray(data, dtype="<f4", order="C")
    if arr.ndim not in (1, 2, 3):
        raise ValidationError(f"tensor rank must be 1, 2 or 3, got {arr.ndim}")
    if any(d < 1 for d in arr.shape):
        raise ValidationError(f"all dims must be positive, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("tensor contains NaN or Inf")

    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, DTYPE_F32, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.tobytes(order="C"))


def _parse_header(buf: bytes, path: str | Path) -> tuple[int, ...]:
    if len(buf) < _HEADER.size:
        raise FormatError(f"{path}: file shorter than DADF header")
    magic, version, dtype, ndim = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dtype != DTYPE_F32:
        raise FormatError(f"{path}: unsupported dtype code {dtype}")
    if ndim not in (1, 2, 3):
        raise FormatError(f"{path}: ndim must be 1, 2 or 3, got {ndim}")
    dims_end = _HEADER.size + 8 * ndim
    if len(buf) < dims_end:
        raise FormatError(f"{path}: truncated dims block")
    dims = struct.unpack(f"<{ndim}Q", buf[_HEADER.size:dims_end])
    if any(d < 1 for d in dims):
        raise FormatError(f"{path}: non-positive dim in {dims}")
    return dims


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a DADF file back into a C-contiguous float32 array."""
    buf = Path(path).read_bytes()
    dims = _parse_header(buf, path)
    offset = _HEADER.size + 8 * len(dims)
    count = int(np.prod(dims))
    expected = offset + 4 * count
    if len(buf) != expected:
        raise FormatError(
            f"{path}: payload length {len(buf) - offset} bytes, "
            f"expected {4 * count} for dims {dims}"
        )
    arr = np.frombuffer(buf, dtype="<f4", count=count, offset=offset)
    arr = arr.reshape(dims).astype(np.float32, copy=True)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{path}: payload contains NaN or Inf")
    return arr


def read_header(path: str | Path) -> tuple[int, ...]:
    """Return the dims of a DADF file without loading the payload.

    The byte length on disk is still checked against the header, so a
    truncated file fails here rather than at first use.
    """
    p = Path(path)
    size = p.stat().st_size
    with open(p, "rb") as fh:
        buf = fh.read(_HEADER.size + 8 * 3)
    dims = _parse_header(buf, path)
    expected = _HEADER.size + 8 * len(dims) + 4 * int(np.prod(dims))
    if size != expected:
        raise FormatError(f"{path}: file is {size} bytes, header implies {expected}")
    return dims
