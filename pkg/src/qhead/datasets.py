"""Embedding datasets: binary/CSV ingestion, split construction, synthetic data.

Binary layout ("EMB1", all little-endian):

    bytes 0-3   magic "EMB1"
    u32         dim
    u32         count
    data        count rows of dim float32 values
    labels      count uint8 class indices

The CSV form is one header line ``label,f0,...,f{dim-1}`` followed by one row
per sample; both encodings describe the identical in-memory dataset.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import seeding
from .errors import ConfigurationError, DataError, DataFormatError

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")


@dataclass
class EmbeddingDataset:
    """Labeled embedding vectors plus optional train/val/test index splits."""

    vectors: np.ndarray  # (count, dim) float32
    labels: np.ndarray  # (count,) int64
    train_idx: np.ndarray | None = None
    val_idx: np.ndarray | None = None
    test_idx: np.ndarray | None = None

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.vectors.ndim != 2:
            raise ConfigurationError(f"vectors must be 2-D, got shape {self.vectors.shape}")
        if self.labels.shape != (len(self.vectors),):
            raise ConfigurationError(
                f"got {len(self.labels)} labels for {len(self.vectors)} vectors"
            )

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.vectors)

    def split_indices(self, split: str) -> np.ndarray:
        idx = {"train": self.train_idx, "val": self.val_idx, "test": self.test_idx}.get(split)
        if idx is None:
            raise ConfigurationError(f"dataset has no {split!r} split")
        return idx

    def split_arrays(self, split: str) -> tuple[np.ndarray, np.ndarray]:
        idx = self.split_indices(split)
        return self.vectors[idx], self.labels[idx]


def _check_labels(labels: np.ndarray, num_classes: int | None) -> None:
    if num_classes is not None and labels.size and int(labels.max()) >= num_classes:
        raise DataError(
            f"label {int(labels.max())} out of range for {num_classes} classes"
        )


def save_embeddings_binary(dataset: EmbeddingDataset, path) -> None:
    if len(dataset) > 0xFFFFFFFF or dataset.dim > 0xFFFFFFFF:
        raise ConfigurationError("dataset too large for the binary header")
    if dataset.labels.size and (dataset.labels.min() < 0 or dataset.labels.max() > 255):
        raise DataError("labels must fit in an unsigned byte")
    parts = [
        _HEADER.pack(MAGIC, dataset.dim, len(dataset)),
        np.ascontiguousarray(dataset.vectors, dtype="<f4").tobytes(),
        dataset.labels.astype(np.uint8).tobytes(),
    ]
    Path(path).write_bytes(b"".join(parts))


def _load_binary(path, num_classes: int | None) -> EmbeddingDataset:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise DataFormatError(
            f"file is {len(blob)} bytes, shorter than the {_HEADER.size}-byte header"
        )
    magic, dim, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise DataFormatError(f"bad magic {magic!r} at byte 0, expected {MAGIC!r}")
    expected = _HEADER.size + count * dim * 4 + count
    if len(blob) != expected:
        raise DataFormatError(
            f"payload for dim={dim}, count={count} needs {expected} bytes, file has {len(blob)}"
        )
    vec_bytes = count * dim * 4
    vectors = np.frombuffer(
        blob, dtype="<f4", count=count * dim, offset=_HEADER.size
    ).reshape(count, dim)
    labels = np.frombuffer(blob, dtype=np.uint8, count=count, offset=_HEADER.size + vec_bytes)
    labels = labels.astype(np.int64)
    _check_labels(labels, num_classes)
    return EmbeddingDataset(vectors.copy(), labels)


def save_embeddings_csv(dataset: EmbeddingDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("label," + ",".join(f"f{i}" for i in range(dataset.dim)) + "\n")
        for label, row in zip(dataset.labels, dataset.vectors):
            fh.write(str(int(label)) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def _load_csv(path, num_classes: int | None) -> EmbeddingDataset:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        fields = header.split(",")
        dim = len(fields) - 1
        if dim < 1 or fields[0] != "label" or fields[1:] != [f"f{i}" for i in range(dim)]:
            raise DataFormatError(
                f"bad CSV header {header[:60]!r}, expected 'label,f0,...,f{{dim-1}}'"
            )
        labels = []
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != dim + 1:
                raise DataFormatError(
                    f"line {lineno} has {len(cells)} fields, expected {dim + 1}"
                )
            labels.append(int(cells[0]))
            rows.append(np.array([np.float32(c) for c in cells[1:]], dtype=np.float32))
    labels = np.asarray(labels, dtype=np.int64)
    _check_labels(labels, num_classes)
    vectors = np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
    return EmbeddingDataset(vectors, labels)


def load_embeddings(path, format: str = "binary",
                    num_classes: int | None = None) -> EmbeddingDataset:
    """Read an embedding dataset from disk (format "binary" or "csv")."""
    if format == "binary":
        return _load_binary(path, num_classes)
    if format == "csv":
        return _load_csv(path, num_classes)
    raise ConfigurationError(f"unknown dataset format {format!r}")


def _stratified_pick(labels: np.ndarray, per_class: dict[int, int],
                     rng: np.random.Generator) -> dict[int, np.ndarray]:
    picked = {}
    for cls, want in per_class.items():
        pool = np.flatnonzero(labels == cls)
        if len(pool) < want:
            raise DataError(
                f"class {cls} has only {len(pool)} samples, need at least {want}"
            )
        picked[cls] = pool[rng.permutation(len(pool))[:want]]
    return picked


def make_benchmark_splits(dataset: EmbeddingDataset, seed: int) -> EmbeddingDataset:
    """256 samples per class for train+val (85/15, stratified); the rest is test.

    The 15% validation share rounds down per class (38 of 256), so the sizes
    are 436 train / 76 val, and every remaining sample lands in the test split.
    """
    take = 256
    picked = _stratified_pick(
        dataset.labels, {0: take, 1: take}, seeding.stream(seed, seeding.DATA_SPLIT)
    )
    val_per_class = int(0.15 * 2 * take) // 2  # 38
    train_parts, val_parts = [], []
    selected = []
    for cls in (0, 1):
        idx = picked[cls]
        val_parts.append(idx[:val_per_class])
        train_parts.append(idx[val_per_class:])
        selected.append(idx)
    train_idx = np.sort(np.concatenate(train_parts))
    val_idx = np.sort(np.concatenate(val_parts))
    chosen = np.concatenate(selected)
    mask = np.ones(len(dataset), dtype=bool)
    mask[chosen] = False
    test_idx = np.flatnonzero(mask)
    return replace(dataset, train_idx=train_idx, val_idx=val_idx, test_idx=test_idx)


def make_count_splits(dataset: EmbeddingDataset, train_per_class: int,
                      val_per_class: int, seed: int) -> EmbeddingDataset:
    """Stratified splits with explicit per-class counts; the rest is test."""
    classes = np.unique(dataset.labels)
    want = train_per_class + val_per_class
    picked = _stratified_pick(
        dataset.labels, {int(c): want for c in classes}, seeding.stream(seed, seeding.DATA_SPLIT)
    )
    train_parts, val_parts = [], []
    for c in classes:
        idx = picked[int(c)]
        val_parts.append(idx[:val_per_class])
        train_parts.append(idx[val_per_class:])
    train_idx = np.sort(np.concatenate(train_parts))
    val_idx = np.sort(np.concatenate(val_parts))
    mask = np.ones(len(dataset), dtype=bool)
    mask[np.concatenate([picked[int(c)] for c in classes])] = False
    test_idx = np.flatnonzero(mask)
    return replace(dataset, train_idx=train_idx, val_idx=val_idx, test_idx=test_idx)


def pool_to_dim(dataset: EmbeddingDataset, out_dim: int) -> EmbeddingDataset:
    """Block-average adjacent features down to ``out_dim`` (dim must divide evenly).

    Desk-scale registers hold 2^Qc amplitudes, so wide embeddings need a
    reduction before amplitude encoding; averaging equal blocks shrinks signal
    and noise together, preserving separability, where truncation would not.
    """
    if out_dim < 1 or dataset.dim % out_dim:
        raise ConfigurationError(
            f"cannot pool dim {dataset.dim} to {out_dim}: not an even divisor"
        )
    block = dataset.dim // out_dim
    pooled = dataset.vectors.reshape(len(dataset), out_dim, block).mean(axis=2)
    return replace(dataset, vectors=pooled.astype(np.float32))


def pca_project(dataset: EmbeddingDataset, out_dim: int,
                fit_split: str | None = "train") -> EmbeddingDataset:
    """Project vectors onto their top principal components (labels unused).

    The components are fit on one split (default "train", falling back to all
    vectors when the dataset has no splits) so evaluation data never shapes
    the projection. This is the standard way to fit wide embeddings into a
    small amplitude-encoding register without washing out their structure.
    """
    if out_dim < 1 or out_dim > dataset.dim:
        raise ConfigurationError(
            f"PCA target must be in [1, {dataset.dim}], got {out_dim}"
        )
    if fit_split is not None and dataset.train_idx is not None:
        fit_vectors = dataset.split_arrays(fit_split)[0]
    else:
        fit_vectors = dataset.vectors
    fit = np.asarray(fit_vectors, dtype=np.float64)
    center = fit.mean(axis=0)
    _, _, vt = np.linalg.svd(fit - center, full_matrices=False)
    components = vt[:out_dim]
    projected = (np.asarray(dataset.vectors, dtype=np.float64) - center) @ components.T
    return replace(dataset, vectors=projected.astype(np.float32))


def append_anchor_feature(dataset: EmbeddingDataset, value: float = 1.0) -> EmbeddingDataset:
    """Append a constant feature to every vector.

    Amplitude encoding followed by expectation values is blind to a global
    sign flip of the state, so data whose class structure is an exact
    reflection through the origin (e.g. clusters with antipodal means) would
    be invisible to the head. A constant anchor component pins the sign and
    makes such structure measurable again.
    """
    if value == 0.0:
        raise ConfigurationError("anchor value must be non-zero")
    column = np.full((len(dataset), 1), value, dtype=np.float32)
    return replace(dataset, vectors=np.hstack([dataset.vectors, column]))


def synthetic_clusters(dim: int, n_per_class: int, separation: float,
                       seed: int) -> EmbeddingDataset:
    """Two isotropic Gaussian clusters at +/- (separation/2) along a random axis."""
    if separation < 0:
        raise ConfigurationError(f"separation must be >= 0, got {separation}")
    rng = seeding.stream(seed, seeding.SYNTHETIC)
    axis = rng.standard_normal(dim)
    axis /= np.linalg.norm(axis)
    centers = np.stack([-0.5 * separation * axis, 0.5 * separation * axis])
    vectors = np.empty((2 * n_per_class, dim), dtype=np.float32)
    labels = np.empty(2 * n_per_class, dtype=np.int64)
    for cls in (0, 1):
        block = slice(cls * n_per_class, (cls + 1) * n_per_class)
        vectors[block] = (centers[cls] + rng.standard_normal((n_per_class, dim))).astype(
            np.float32
        )
        labels[block] = cls
    return EmbeddingDataset(vectors, labels)
