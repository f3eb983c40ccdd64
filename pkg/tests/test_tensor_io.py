import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anomap.errors import FormatError, ValidationError
from anomap.tensor_io import read_header, read_tensor, write_tensor


def test_header_layout_exact_bytes(tmp_path):
    path = tmp_path / "t.dadf"
    write_tensor(np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32), path)
    buf = path.read_bytes()
    # magic + u32 version + u8 dtype + u8 ndim + 2 zero bytes
    assert buf[:4] == b"DADF"
    assert struct.unpack("<I", buf[4:8])[0] == 1
    assert buf[8] == 1 and buf[9] == 2
    assert buf[10:12] == b"\x00\x00"
    assert struct.unpack("<2Q", buf[12:28]) == (2, 2)
    assert len(buf) == 12 + 16 + 16
    assert struct.unpack("<4f", buf[28:]) == (1.0, 2.0, 3.0, 4.0)


def test_round_trip_identity(tmp_path):
    path = tmp_path / "t.dadf"
    t = np.array([0.0, 0.0, 0.0], dtype=np.float32)
    write_tensor(t, path)
    back = read_tensor(path)
    assert back.dtype == np.float32
    assert np.array_equal(back, t)


def test_nan_rejected_on_write(tmp_path):
    with pytest.raises(ValidationError):
        write_tensor(np.array([1.0, np.nan]), tmp_path / "t.dadf")
    with pytest.raises(ValidationError):
        write_tensor(np.array([np.inf, 1.0]), tmp_path / "t.dadf")


def test_nan_rejected_on_read(tmp_path):
    path = tmp_path / "t.dadf"
    write_tensor(np.array([1.0, 2.0]), path)
    buf = bytearray(path.read_bytes())
    buf[-4:] = struct.pack("<f", float("nan"))
    path.write_bytes(bytes(buf))
    with pytest.raises(ValidationError):
        read_tensor(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "t.dadf"
    write_tensor(np.array([1.0]), path)
    buf = bytearray(path.read_bytes())
    buf[:4] = b"XXXX"
    path.write_bytes(bytes(buf))
    with pytest.raises(FormatError):
        read_tensor(path)
    with pytest.raises(FormatError):
        read_header(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "t.dadf"
    write_tensor(np.array([[1.0, 2.0], [3.0, 4.0]]), path)
    buf = path.read_bytes()
    path.write_bytes(buf[:-4])  # dims say 4 floats, give 3
    with pytest.raises(FormatError):
        read_tensor(path)
    with pytest.raises(FormatError):
        read_header(path)


def test_wrong_version_and_dtype(tmp_path):
    path = tmp_path / "t.dadf"
    write_tensor(np.array([1.0]), path)
    buf = bytearray(path.read_bytes())
    buf[4] = 9
    path.write_bytes(bytes(buf))
    with pytest.raises(FormatError):
        read_tensor(path)
    buf[4] = 1
    buf[8] = 7
    path.write_bytes(bytes(buf))
    with pytest.raises(FormatError):
        read_tensor(path)


def test_rank_and_dim_validation(tmp_path):
    with pytest.raises(ValidationError):
        write_tensor(np.zeros((2, 2, 2, 2)), tmp_path / "t.dadf")
    with pytest.raises(ValidationError):
        write_tensor(np.zeros((0,)), tmp_path / "t.dadf")


@st.composite
def small_tensors(draw):
    ndim = draw(st.integers(1, 3))
    dims = [draw(st.integers(1, 8 if ndim == 3 else 64)) for _ in range(ndim)]
    flat = draw(
        st.lists(
            st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False, width=32),
            min_size=int(np.prod(dims)),
            max_size=int(np.prod(dims)),
        )
    )
    return np.asarray(flat, dtype=np.float32).reshape(dims)


@settings(max_examples=60, deadline=None)
@given(small_tensors())
def test_round_trip_bit_exact_property(tmp_path_factory, t):
    path = tmp_path_factory.mktemp("rt") / "t.dadf"
    write_tensor(t, path)
    back = read_tensor(path)
    assert back.shape == t.shape
    assert back.tobytes() == t.tobytes()
    assert read_header(path) == t.shape


def test_header_consistent_with_payload_random_shapes(tmp_path):
    rng = np.random.default_rng(0)
    for _ in range(10):
        dims = tuple(rng.integers(1, 65, size=rng.integers(1, 4)))
        t = rng.random(dims, dtype=np.float32)
        path = tmp_path / "t.dadf"
        write_tensor(t, path)
        assert path.stat().st_size == 12 + 8 * len(dims) + 4 * t.size
        assert read_header(path) == dims
