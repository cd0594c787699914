"""MNIST ingestion, 784-to-62 feature reduction, and input quantization.

The reduction pipeline is deliberately adder-only and bit-reproducible:
non-overlapping 2x2 average pooling (floored) takes 28x28 pixels to a 196
position grid, then the 62 highest-variance positions of the training set are
kept.  Variance ordering is computed in exact integer arithmetic so the
selected index set never depends on floating-point platform details; the
chosen indices are persisted in the model file, so inference never needs the
training set.
"""

import gzip
import struct
from pathlib import Path

import numpy as np

from .errors import IdxFormatError, IdxTruncatedError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
IMAGE_SIZE = 28
FEATURE_COUNT = 62

TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"


def parse_idx_images(data: bytes) -> np.ndarray:
    """Parse an IDX image container into a (N, 28, 28) uint8 array."""
    if len(data) < 16:
        raise IdxTruncatedError(f"image header needs 16 bytes, got {len(data)}")
    magic, count, rows, cols = struct.unpack(">IIII", data[:16])
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(f"bad image magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}")
    if rows != IMAGE_SIZE or cols != IMAGE_SIZE:
        raise IdxFormatError(f"unsupported image size {rows}x{cols}, expected 28x28")
    expected = 16 + count * rows * cols
    if len(data) != expected:
        raise IdxTruncatedError(
            f"image payload size mismatch: header implies {expected} bytes, got {len(data)}"
        )
    pixels = np.frombuffer(data, dtype=np.uint8, offset=16)
    return pixels.reshape(count, rows, cols).copy()


def parse_idx_labels(data: bytes) -> np.ndarray:
    """Parse an IDX label container into a (N,) uint8 array of digits 0-9."""
    if len(data) < 8:
        raise IdxTruncatedError(f"label header needs 8 bytes, got {len(data)}")
    magic, count = struct.unpack(">II", data[:8])
    if magic != LABEL_MAGIC:
        raise IdxFormatError(f"bad label magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x}")
    if len(data) != 8 + count:
        raise IdxTruncatedError(
            f"label payload size mismatch: header implies {8 + count} bytes, got {len(data)}"
        )
    labels = np.frombuffer(data, dtype=np.uint8, offset=8).copy()
    if labels.size and labels.max() > 9:
        bad = int(labels.max())
        raise IdxFormatError(f"label value {bad} outside [0, 9]")
    return labels


def _read_maybe_gz(path: Path) -> bytes:
    gz = path.with_name(path.name + ".gz")
    if path.exists():
        return path.read_bytes()
    if gz.exists():
        with gzip.open(gz, "rb") as fh:
            return fh.read()
    raise FileNotFoundError(f"neither {path} nor {gz} exists")


def load_split(mnist_dir, train: bool) -> tuple[np.ndarray, np.ndarray]:
    """Load one split from a directory of canonical IDX files (.gz accepted)."""
    mnist_dir = Path(mnist_dir)
    img_name, lbl_name = (TRAIN_IMAGES, TRAIN_LABELS) if train else (TEST_IMAGES, TEST_LABELS)
    images = parse_idx_images(_read_maybe_gz(mnist_dir / img_name))
    labels = parse_idx_labels(_read_maybe_gz(mnist_dir / lbl_name))
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"image/label count mismatch: {images.shape[0]} vs {labels.shape[0]}"
        )
    return images, labels


def pool2x2(img: np.ndarray) -> np.ndarray:
    """Average-pool one 28x28 image into 196 values, flooring the mean."""
    img = np.asarray(img, dtype=np.uint16)
    if img.shape != (IMAGE_SIZE, IMAGE_SIZE):
        raise ValueError(f"expected a 28x28 image, got {img.shape}")
    sums = img.reshape(14, 2, 14, 2).sum(axis=(1, 3))
    return (sums // 4).astype(np.uint8).reshape(-1)


def pool2x2_batch(images: np.ndarray) -> np.ndarray:
    """Pool a (N, 28, 28) stack into (N, 196)."""
    images = np.asarray(images, dtype=np.uint16)
    if images.ndim != 3 or images.shape[1:] != (IMAGE_SIZE, IMAGE_SIZE):
        raise ValueError(f"expected (N, 28, 28) images, got {images.shape}")
    sums = images.reshape(-1, 14, 2, 14, 2).sum(axis=(2, 4))
    return (sums // 4).astype(np.uint8).reshape(images.shape[0], -1)


def select_features(pooled: np.ndarray, count: int = FEATURE_COUNT) -> np.ndarray:
    """Indices of the `count` highest-variance pooled positions, ascending.

    Ranks by the exact integer quantity N*sum(x^2) - (sum x)^2, which orders
    positions identically to population variance but with no rounding; ties
    break toward the lower index.
    """
    pooled = np.asarray(pooled)
    if pooled.ndim != 2 or pooled.shape[0] == 0:
        raise ValueError("pooled training set must be a non-empty (N, P) array")
    n = pooled.shape[0]
    x = pooled.astype(np.int64)
    sums = x.sum(axis=0)
    sqsums = (x * x).sum(axis=0)
    var_scaled = n * sqsums - sums * sums
    order = sorted(range(pooled.shape[1]), key=lambda i: (-var_scaled[i], i))
    return np.array(sorted(order[:count]), dtype=np.int64)


def quantize_input(pooled: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Select features and requantize [0,255] pixels to 7-bit magnitudes.

    round_half_up(v * 127 / 255), computed exactly in integers.
    """
    pooled = np.asarray(pooled)
    selected = pooled[..., np.asarray(indices)].astype(np.int64)
    return ((selected * 254 + 255) // 510).astype(np.uint8)


def prepare_features(images: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Full input pipeline for a (N, 28, 28) stack: pool, select, quantize."""
    return quantize_input(pool2x2_batch(images), indices)
