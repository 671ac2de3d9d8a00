"""Dataset IO and batching: IDX files, digit filtering, synthetic images.

IDX layout is big-endian: images carry header {magic 2051, count, rows,
cols} as u32 and labels {magic 2049, count}, followed by raw uint8
payload in row-major order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError, FormatError
from .optim import one_hot
from .tensor import DEFAULT_DTYPE, Tensor

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049


@dataclass
class LabeledImages:
    images: np.ndarray  # [N, rows, cols], values 0..255
    labels: np.ndarray  # [N]

    def __post_init__(self):
        self.images = np.asarray(self.images)
        self.labels = np.asarray(self.labels).reshape(-1)
        if self.images.ndim != 3:
            raise DimensionError(f"images must be [N, rows, cols], "
                                 f"got {self.images.shape}")
        if len(self.images) != len(self.labels):
            raise DimensionError(
                f"{len(self.images)} images vs {len(self.labels)} labels")
        if self.images.size and (self.images.min() < 0 or self.images.max() > 255):
            raise ContractError("pixel values must lie in 0..255")

    def __len__(self) -> int:
        return len(self.labels)


def _read_exact(fh, n: int, path: str) -> bytes:
    chunk = fh.read(n)
    if len(chunk) != n:
        raise FormatError(f"{path}: truncated file")
    return chunk


def load_idx_images(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, count, rows, cols = struct.unpack(">IIII", _read_exact(fh, 16, path))
        if magic != IMAGE_MAGIC:
            raise FormatError(f"{path}: bad image magic {magic}")
        payload = fh.read()
    if len(payload) != count * rows * cols:
        raise FormatError(f"{path}: payload size {len(payload)} does not match "
                          f"header {count}x{rows}x{cols}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols).copy()


def load_idx_labels(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, count = struct.unpack(">II", _read_exact(fh, 8, path))
        if magic != LABEL_MAGIC:
            raise FormatError(f"{path}: bad label magic {magic}")
        payload = fh.read()
    if len(payload) != count:
        raise FormatError(f"{path}: payload size {len(payload)} does not match "
                          f"header count {count}")
    return np.frombuffer(payload, dtype=np.uint8).copy()


def save_idx_images(path: str, images: np.ndarray) -> None:
    images = np.asarray(images)
    if images.ndim != 3:
        raise DimensionError(f"images must be [N, rows, cols], got {images.shape}")
    if images.size and (images.min() < 0 or images.max() > 255):
        raise ContractError("pixel values must lie in 0..255")
    n, rows, cols = images.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        fh.write(images.astype(np.uint8).tobytes())


def save_idx_labels(path: str, labels: np.ndarray) -> None:
    labels = np.asarray(labels).reshape(-1)
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise ContractError("labels must lie in 0..255")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, len(labels)))
        fh.write(labels.astype(np.uint8).tobytes())


def load_dataset(image_path: str, label_path: str) -> LabeledImages:
    return LabeledImages(load_idx_images(image_path), load_idx_labels(label_path))


def filter_digits(data: LabeledImages, digits) -> LabeledImages:
    """Keep samples whose label is in digits, preserving order."""
    mask = np.isin(data.labels, list(digits))
    return LabeledImages(data.images[mask], data.labels[mask])


def batch_generator(data: LabeledImages, batch_size: int, shuffle: bool = False,
                    seed: int = 0, num_classes: int | None = None):
    """Yield (x, y) batches: x in [0, 1] shaped [B, 1, rows, cols], y one-hot.

    The final short batch is emitted; shuffling is a seeded permutation.
    """
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    n = len(data)
    if num_classes is None:
        num_classes = int(data.labels.max()) + 1 if n else 1
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(seed).permutation(n)
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        x = data.images[idx].astype(DEFAULT_DTYPE) / 255.0
        x = x[:, None, :, :]
        yield Tensor(x), one_hot(data.labels[idx], num_classes)


def synthetic_digits(count: int, num_classes: int = 10, rows: int = 28,
                     cols: int = 28, seed: int = 0) -> LabeledImages:
    """Deterministic stand-in classification set.

    Class k draws a bright horizontal bar whose row is fixed per class
    (with horizontal jitter), over a noisy background, so any of the
    reference models can separate the classes.
    """
    if count < 1 or not 1 <= num_classes <= 10:
        raise ContractError("count must be >= 1 and num_classes in 1..10")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, num_classes, size=count)
    bar_rows = np.round(np.linspace(2, rows - 4, 10)).astype(int)
    images = np.zeros((count, rows, cols), dtype=np.float64)
    for i, label in enumerate(labels):
        y = bar_rows[label]
        dx = int(rng.integers(-2, 3))
        x0, x1 = max(0, 4 + dx), min(cols, cols - 4 + dx)
        images[i, y:y + 2, x0:x1] = 220.0
        images[i] += rng.normal(0.0, 25.0, size=(rows, cols))
    images = np.clip(images, 0, 255).astype(np.uint8)
    return LabeledImages(images, labels.astype(np.uint8))


def qae_vectors(count: int, dim: int, support: int, seed: int = 0) -> np.ndarray:
    """Unit vectors confined to the first `support` coordinates of `dim`."""
    if not 1 <= support <= dim:
        raise ContractError("need 1 <= support <= dim")
    rng = np.random.default_rng(seed)
    out = np.zeros((count, dim), dtype=np.float64)
    block = rng.normal(size=(count, support))
    out[:, :support] = block / np.linalg.norm(block, axis=1, keepdims=True)
    return out
