"""Dataset access: IDX decoding, the synthetic set, class filtering."""
import gzip
import struct

import numpy as np
import pytest

from trainexport.data import (
    binary_subset,
    load_dataset,
    load_idx_split,
    read_idx,
    synthetic_digits,
)


def _idx_bytes(code: int, shape: tuple, payload: bytes) -> bytes:
    head = struct.pack(f">HBB{len(shape)}I", 0, code, len(shape), *shape)
    return head + payload


def test_read_idx_decodes_unsigned_bytes(tmp_path):
    arr = (np.arange(24) % 256).astype(np.uint8).reshape(2, 3, 4)
    path = tmp_path / "images-idx3-ubyte"
    path.write_bytes(_idx_bytes(0x08, arr.shape, arr.tobytes()))
    assert np.array_equal(read_idx(path), arr)


def test_read_idx_reads_gzip(tmp_path):
    arr = np.array([5, 0, 255], dtype=np.uint8)
    path = tmp_path / "labels-idx1-ubyte.gz"
    path.write_bytes(gzip.compress(_idx_bytes(0x08, arr.shape,
                                              arr.tobytes())))
    assert np.array_equal(read_idx(path), arr)


def test_read_idx_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk"
    path.write_bytes(b"\x00\x01\x08\x01" + b"\x00" * 8)
    with pytest.raises(ValueError):
        read_idx(path)


def test_read_idx_rejects_short_payload(tmp_path):
    path = tmp_path / "short-idx1-ubyte"
    path.write_bytes(_idx_bytes(0x08, (10,), b"\x01\x02"))
    with pytest.raises(ValueError):
        read_idx(path)


def test_load_idx_split_scales_and_flattens(tmp_path):
    images = (np.arange(2 * 28 * 28) % 256).astype(np.uint8)
    images = images.reshape(2, 28, 28)
    labels = np.array([7, 2], dtype=np.uint8)
    (tmp_path / "train-images-idx3-ubyte").write_bytes(
        _idx_bytes(0x08, images.shape, images.tobytes()))
    (tmp_path / "train-labels-idx1-ubyte").write_bytes(
        _idx_bytes(0x08, labels.shape, labels.tobytes()))
    x, y = load_idx_split(tmp_path, "train")
    assert x.shape == (2, 784)
    assert 0.0 <= x.min() and x.max() <= 1.0
    assert np.array_equal(x[0, :4] * 255.0, [0, 1, 2, 3])
    assert np.array_equal(y, [7, 2])


def test_load_dataset_missing_idx_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path)


def test_synthetic_is_deterministic_and_balanced():
    x1, y1 = synthetic_digits(200, 3)
    x2, y2 = synthetic_digits(200, 3)
    assert np.array_equal(x1, x2) and np.array_equal(y1, y2)
    assert x1.shape == (200, 784)
    assert 0.0 <= x1.min() and x1.max() <= 1.0
    counts = np.bincount(y1, minlength=10)
    assert counts.max() - counts.min() <= 1
    x3, _ = synthetic_digits(200, 4)
    assert not np.array_equal(x1, x3)


def test_load_dataset_synthetic_counts_and_distinct_splits():
    data = load_dataset(None, seed=1, train_count=60, test_count=30)
    assert data["source"] == "synthetic"
    assert data["x_train"].shape == (60, 784)
    assert data["x_test"].shape == (30, 784)
    assert data["y_train"].shape == (60,)
    assert not np.array_equal(data["x_train"][:30], data["x_test"])


def test_binary_subset_maps_second_class_to_one():
    x = np.arange(12, dtype=float).reshape(6, 2)
    y = np.array([3, 5, 1, 3, 5, 5])
    xs, ys = binary_subset(x, y, (3, 5))
    assert xs.shape == (5, 2)
    assert np.array_equal(ys, [0, 1, 0, 1, 1])
    assert np.array_equal(xs[0], x[0]) and np.array_equal(xs[1], x[1])


def test_binary_subset_rejects_equal_pair():
    with pytest.raises(ValueError):
        binary_subset(np.zeros((2, 2)), np.array([4, 4]), (4, 4))
