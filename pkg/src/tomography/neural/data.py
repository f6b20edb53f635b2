"""Desk-scale datasets: Gaussian class blobs and IDX (MNIST-style) files."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..numerics import RngLike, as_generator

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    pass


class IdxMagicError(IdxFormatError):
    pass


class IdxShapeError(IdxFormatError):
    pass


class IdxTruncatedError(IdxFormatError):
    pass


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray
    labels: np.ndarray  # one-hot, (N, C)

    def __post_init__(self) -> None:
        x = np.asarray(self.inputs, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.float64)
        if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValueError(f"inputs {x.shape} and labels {y.shape} disagree")
        if x.shape[0] < 1:
            raise ValueError("dataset must contain at least one example")
        if not (np.all((y == 0) | (y == 1)) and np.all(y.sum(axis=1) == 1)):
            raise ValueError("labels must be one-hot")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "labels", y)

    @classmethod
    def from_class_ids(cls, inputs, class_ids, num_classes: int) -> "Dataset":
        ids = np.asarray(class_ids, dtype=np.int64)
        return cls(inputs, np.eye(num_classes)[ids])

    @property
    def size(self) -> int:
        return self.inputs.shape[0]

    @property
    def num_classes(self) -> int:
        return self.labels.shape[1]

    @property
    def class_ids(self) -> np.ndarray:
        return np.argmax(self.labels, axis=1)

    def subset(self, idx) -> "Dataset":
        return Dataset(self.inputs[idx], self.labels[idx])

    def head(self, n: int) -> "Dataset":
        return self.subset(slice(0, n))


def make_blobs(num_classes: int, samples_per_class: int, input_dim: int,
               separation: float, rng: RngLike, noise: float = 1.0) -> Dataset:
    """Isotropic Gaussian clusters, one per class, in shuffled order.

    Class centers are pairwise at least ``separation`` apart; with
    ``input_dim >= num_classes`` they form a randomly rotated regular simplex
    so every pair sits at exactly that distance.
    """
    if num_classes < 1 or samples_per_class < 1 or input_dim < 1:
        raise ValueError("sizes must be positive")
    if separation < 0:
        raise ValueError("separation must be non-negative")
    gen = as_generator(rng)
    if input_dim >= num_classes:
        q, _ = np.linalg.qr(gen.standard_normal((input_dim, num_classes)))
        centers = q.T * (separation / np.sqrt(2.0))
    else:
        centers = gen.standard_normal((num_classes, input_dim))
        if num_classes > 1 and separation > 0:
            diff = centers[:, None, :] - centers[None, :, :]
            dist = np.linalg.norm(diff, axis=2)[np.triu_indices(num_classes, 1)]
            centers *= separation / dist.min()
        else:
            centers *= 0.0
    ids = np.repeat(np.arange(num_classes), samples_per_class)
    x = centers[ids] + noise * gen.standard_normal((ids.size, input_dim))
    order = gen.permutation(ids.size)
    return Dataset.from_class_ids(x[order], ids[order], num_classes)


def _read_header(buf: bytes, magic: int, ndim: int, path) -> tuple[int, ...]:
    need = 4 + 4 * ndim
    if len(buf) < need:
        raise IdxTruncatedError(f"{path}: file too short for an IDX header")
    (found,) = struct.unpack(">I", buf[:4])
    if found != magic:
        raise IdxMagicError(f"{path}: magic 0x{found:08x}, expected 0x{magic:08x}")
    return struct.unpack(">" + "I" * ndim, buf[4:need])


def load_idx(images_path, labels_path, limit: int, num_classes: int = 10) -> Dataset:
    """First ``limit`` examples of an IDX image/label pair.

    Pixels are scaled to [0, 1] and flattened; labels become one-hot.
    """
    if limit < 1:
        raise ValueError("limit must be at least 1; empty datasets are rejected")
    img = Path(images_path).read_bytes()
    lab = Path(labels_path).read_bytes()
    n_img, rows, cols = _read_header(img, IDX_IMAGES_MAGIC, 3, images_path)
    (n_lab,) = _read_header(lab, IDX_LABELS_MAGIC, 1, labels_path)
    if n_img != n_lab:
        raise IdxShapeError(f"{n_img} images but {n_lab} labels")
    n = min(limit, n_img)
    if n == 0:
        raise IdxShapeError("IDX files contain no examples")
    pix = rows * cols
    if len(img) < 16 + n * pix:
        raise IdxTruncatedError(f"{images_path}: pixel data truncated")
    if len(lab) < 8 + n:
        raise IdxTruncatedError(f"{labels_path}: label data truncated")
    x = np.frombuffer(img, dtype=np.uint8, count=n * pix, offset=16).reshape(n, pix)
    y = np.frombuffer(lab, dtype=np.uint8, count=n, offset=8).astype(np.int64)
    if y.max() >= num_classes:
        raise IdxShapeError(f"label {int(y.max())} out of range for {num_classes} classes")
    return Dataset.from_class_ids(x.astype(np.float64) / 255.0, y, num_classes)


def write_idx(images: np.ndarray, labels: np.ndarray, images_path, labels_path) -> None:
    """Write uint8 images ``(N, rows, cols)`` and labels ``(N,)`` as IDX files."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    Path(images_path).write_bytes(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols)
                                  + images.tobytes())
    Path(labels_path).write_bytes(struct.pack(">II", IDX_LABELS_MAGIC, labels.size)
                                  + labels.tobytes())
