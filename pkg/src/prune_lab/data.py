"""Datasets: small synthetic 2-D tasks plus IDX and CSV loaders."""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

SYNTHETIC_KINDS = ("spirals", "gaussians", "moons")


class DataError(ValueError):
    """Bad dataset arguments or malformed input file."""


@dataclass
class Dataset:
    name: str
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int
    class_count: int
    train_idx: np.ndarray
    eval_idx: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def x_train(self) -> np.ndarray:
        return self.features[self.train_idx]

    @property
    def y_train(self) -> np.ndarray:
        return self.labels[self.train_idx]

    @property
    def x_eval(self) -> np.ndarray:
        return self.features[self.eval_idx]

    @property
    def y_eval(self) -> np.ndarray:
        return self.labels[self.eval_idx]

    @property
    def input_dim(self) -> int:
        return self.features.shape[1]


def _split_80_20(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    perm = rng.permutation(n)
    n_train = int(round(0.8 * n))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def gen_synthetic(
    kind: str, n: int, noise: float, seed: int, classes: int = 3
) -> Dataset:
    """Deterministic 2-D toy dataset with an 80/20 train/eval split.

    spirals: two interleaved arms; gaussians: `classes` isotropic blobs on a
    circle; moons: two half-circles. Classes are assigned round-robin so the
    balance is within one sample.
    """
    if n < 10:
        raise DataError(f"n: need at least 10 samples, got {n}")
    if noise < 0:
        raise DataError(f"noise: must be >= 0, got {noise}")
    if kind not in SYNTHETIC_KINDS:
        raise DataError(f"unknown synthetic kind {kind!r}; expected one of {SYNTHETIC_KINDS}")

    rng = np.random.Generator(np.random.PCG64(seed))
    if kind == "gaussians":
        k = classes
        if k < 2:
            raise DataError(f"classes: need >= 2 blobs, got {classes}")
        centers = 3.0 * np.stack(
            [np.cos(2 * np.pi * np.arange(k) / k), np.sin(2 * np.pi * np.arange(k) / k)],
            axis=1,
        )
        labels = np.arange(n) % k
        features = centers[labels] + noise * rng.standard_normal((n, 2))
    else:
        k = 2
        labels = np.arange(n) % 2
        within = np.arange(n) // 2  # index within the class
        per_class = np.array([(n + 1) // 2, n // 2])
        frac = within / np.maximum(per_class[labels] - 1, 1)
        if kind == "spirals":
            theta = 4.2 * np.pi * frac + np.pi * labels
            r = 0.2 + 1.8 * frac
            features = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
        else:  # moons
            t = np.pi * frac
            x = np.where(labels == 0, np.cos(t), 1.0 - np.cos(t))
            y = np.where(labels == 0, np.sin(t), 0.5 - np.sin(t))
            features = np.stack([x, y], axis=1)
        features = features + noise * rng.standard_normal((n, 2))

    train_idx, eval_idx = _split_80_20(n, rng)
    return Dataset(
        name=kind,
        features=features,
        labels=labels.astype(np.int64),
        class_count=k,
        train_idx=train_idx,
        eval_idx=eval_idx,
        provenance={"synthetic": {"kind": kind, "n": n, "noise": noise, "seed": seed,
                                  "classes": classes}},
    )


def _read_be32(data: bytes, offset: int, path: str) -> int:
    if offset + 4 > len(data):
        raise DataError(f"{path}: truncated at byte offset {offset} (needed 4 bytes)")
    return struct.unpack_from(">I", data, offset)[0]


def load_idx(images_path: str | Path, labels_path: str | Path, split_seed: int = 0) -> Dataset:
    """Load an IDX image/label file pair (big-endian, MNIST-style format).

    Pixels are scaled to [0, 1]; image and label counts must agree.
    """
    img_bytes = Path(images_path).read_bytes()
    lbl_bytes = Path(labels_path).read_bytes()

    magic = _read_be32(img_bytes, 0, str(images_path))
    if magic != IDX_IMAGE_MAGIC:
        raise DataError(
            f"{images_path}: bad image magic 0x{magic:08x} at byte offset 0 "
            f"(expected 0x{IDX_IMAGE_MAGIC:08x})"
        )
    count = _read_be32(img_bytes, 4, str(images_path))
    rows = _read_be32(img_bytes, 8, str(images_path))
    cols = _read_be32(img_bytes, 12, str(images_path))
    expected = 16 + count * rows * cols
    if len(img_bytes) != expected:
        raise DataError(
            f"{images_path}: expected {expected} bytes, got {len(img_bytes)} "
            f"(payload starts at byte offset 16)"
        )

    lmagic = _read_be32(lbl_bytes, 0, str(labels_path))
    if lmagic != IDX_LABEL_MAGIC:
        raise DataError(
            f"{labels_path}: bad label magic 0x{lmagic:08x} at byte offset 0 "
            f"(expected 0x{IDX_LABEL_MAGIC:08x})"
        )
    lcount = _read_be32(lbl_bytes, 4, str(labels_path))
    if len(lbl_bytes) != 8 + lcount:
        raise DataError(
            f"{labels_path}: expected {8 + lcount} bytes, got {len(lbl_bytes)} "
            f"(payload starts at byte offset 8)"
        )
    if lcount != count:
        raise DataError(
            f"image/label count mismatch: {count} images vs {lcount} labels"
        )

    pixels = np.frombuffer(img_bytes, dtype=np.uint8, offset=16)
    features = pixels.reshape(count, rows * cols).astype(np.float64) / 255.0
    labels = np.frombuffer(lbl_bytes, dtype=np.uint8, offset=8).astype(np.int64)

    rng = np.random.Generator(np.random.PCG64(split_seed))
    train_idx, eval_idx = _split_80_20(count, rng)
    return Dataset(
        name="idx",
        features=features,
        labels=labels,
        class_count=int(labels.max()) + 1,
        train_idx=train_idx,
        eval_idx=eval_idx,
        provenance={"idx": {"images_path": str(images_path), "labels_path": str(labels_path)}},
    )


def load_csv_dataset(path: str | Path, label_column: str, split_seed: int = 0) -> Dataset:
    """Load a headered numeric CSV; labels map to dense 0..C-1 in
    first-appearance order."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header {header}")
        label_pos = header.index(label_column)

        feature_rows: list[list[float]] = []
        raw_labels: list[str] = []
        for row_num, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}"
                )
            try:
                feature_rows.append(
                    [float(v) for i, v in enumerate(row) if i != label_pos]
                )
            except ValueError:
                raise DataError(f"{path}: non-numeric cell in row {row_num}") from None
            raw_labels.append(row[label_pos])

    if not feature_rows:
        raise DataError(f"{path}: no data rows")
    label_map: dict[str, int] = {}
    labels = np.array(
        [label_map.setdefault(v, len(label_map)) for v in raw_labels], dtype=np.int64
    )
    features = np.array(feature_rows, dtype=np.float64)

    rng = np.random.Generator(np.random.PCG64(split_seed))
    train_idx, eval_idx = _split_80_20(len(labels), rng)
    return Dataset(
        name=Path(path).stem,
        features=features,
        labels=labels,
        class_count=len(label_map),
        train_idx=train_idx,
        eval_idx=eval_idx,
        provenance={"csv": {"path": str(path), "label_column": label_column}},
    )
