"""Dataset access: local IDX files when available, a deterministic
synthetic digit stand-in otherwise.

The sandbox has no dataset downloads, so `load_dataset` never fetches
anything: it reads the four standard IDX files (optionally gzipped)
from an explicit directory, or generates the synthetic set.  Synthetic
images are smoothed random class templates plus pixel noise; they keep
the pipeline honest (784-dim inputs, ten reusable classes, nontrivial
test error for weak models) without pretending to be MNIST.
"""
from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

IDX_DTYPES = {
    0x08: np.uint8, 0x09: np.int8, 0x0B: ">i2",
    0x0C: ">i4", 0x0D: ">f4", 0x0E: ">f8",
}

MNIST_FILES = {
    ("train", "images"): "train-images-idx3-ubyte",
    ("train", "labels"): "train-labels-idx1-ubyte",
    ("test", "images"): "t10k-images-idx3-ubyte",
    ("test", "labels"): "t10k-labels-idx1-ubyte",
}

IMAGE_SIDE = 28
NUM_CLASSES = 10


def read_idx(path) -> np.ndarray:
    """Decode one IDX file (gzipped or raw) into an array."""
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as handle:
        raw = handle.read()
    zero, code, rank = struct.unpack(">HBB", raw[:4])
    if zero != 0 or code not in IDX_DTYPES:
        raise ValueError(f"not an IDX file: {path}")
    shape = struct.unpack(f">{rank}I", raw[4:4 + 4 * rank])
    data = np.frombuffer(raw, IDX_DTYPES[code], offset=4 + 4 * rank)
    if data.size != int(np.prod(shape)):
        raise ValueError(f"IDX payload size mismatch in {path}")
    return data.reshape(shape)


def _find_idx(data_dir: Path, split: str, kind: str) -> Path:
    base = data_dir / MNIST_FILES[(split, kind)]
    for candidate in (base, base.with_name(base.name + ".gz")):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"missing IDX file {base}(.gz)")


def load_idx_split(data_dir, split: str) -> tuple[np.ndarray, np.ndarray]:
    """Images scaled to [0, 1] and flattened, labels as ints."""
    data_dir = Path(data_dir)
    images = read_idx(_find_idx(data_dir, split, "images"))
    labels = read_idx(_find_idx(data_dir, split, "labels"))
    if images.ndim != 3 or len(images) != len(labels):
        raise ValueError("IDX image/label shapes disagree")
    flat = images.reshape(len(images), -1).astype(np.float64) / 255.0
    return flat, labels.astype(np.int64)


def _template(label: int) -> np.ndarray:
    """Fixed smooth random field in [0, 1] identifying one class."""
    field = np.random.default_rng((9, label)).normal(
        size=(IMAGE_SIDE, IMAGE_SIDE))
    kernel = np.ones(7) / 7.0
    for axis in (0, 1):
        field = np.apply_along_axis(
            lambda row: np.convolve(row, kernel, mode="same"), axis, field)
    lo, hi = field.min(), field.max()
    return (field - lo) / (hi - lo)


def synthetic_digits(count: int, seed: int,
                     noise: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """`count` flattened noisy template images with balanced labels.

    The default noise scale leaves a full-width network near zero test
    error while heavily damaging crude approximations of it, so model
    comparisons on this set stay informative.
    """
    rng = np.random.default_rng((11, seed))
    labels = np.arange(count) % NUM_CLASSES
    rng.shuffle(labels)
    templates = np.stack([_template(k) for k in range(NUM_CLASSES)])
    jitter = rng.normal(scale=noise, size=(count, IMAGE_SIDE, IMAGE_SIDE))
    images = np.clip(templates[labels] + jitter, 0.0, 1.0)
    return images.reshape(count, -1), labels.astype(np.int64)


def load_dataset(data_dir=None, seed: int = 0, train_count=None,
                 test_count=None) -> dict:
    """Train/test arrays plus the source tag, truncated if asked.

    `data_dir=None` selects the synthetic set (sized by the counts,
    default 5000/1000); a given directory must hold the IDX files.
    """
    if data_dir is None:
        x_train, y_train = synthetic_digits(train_count or 5000, 2 * seed)
        x_test, y_test = synthetic_digits(test_count or 1000, 2 * seed + 1)
        source = "synthetic"
    else:
        x_train, y_train = load_idx_split(data_dir, "train")
        x_test, y_test = load_idx_split(data_dir, "test")
        source = "mnist-idx"
        if train_count is not None:
            x_train, y_train = x_train[:train_count], y_train[:train_count]
        if test_count is not None:
            x_test, y_test = x_test[:test_count], y_test[:test_count]
    return {"x_train": x_train, "y_train": y_train,
            "x_test": x_test, "y_test": y_test, "source": source}


def binary_subset(x: np.ndarray, y: np.ndarray,
                  pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Rows of the two classes, relabeled 0/1 (second class maps to 1)."""
    first, second = pair
    if first == second:
        raise ValueError("binary pair needs two distinct classes")
    mask = (y == first) | (y == second)
    return x[mask], (y[mask] == second).astype(np.int64)
