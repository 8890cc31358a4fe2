"""Labeled datasets: CSV loading and saving, deterministic shuffle splits,
and synthetic generators for quick experiments.

Binary tasks use labels {-1, +1}; multiclass tasks use small non-negative
integer class ids.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """An immutable labeled dataset.

    Parameters
    ----------
    features : ndarray of shape (num_points, dim)
        Feature rows; must be finite.
    labels : ndarray of shape (num_points,)
        Integer class labels.
    feature_names : tuple of str, optional
        Column names, preserved across CSV round trips.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        feats = np.array(self.features, dtype=float)
        labs = np.array(self.labels)
        if feats.ndim != 2:
            raise ValueError(f"features must be a 2-d array, got ndim={feats.ndim}")
        if feats.shape[0] < 1 or feats.shape[1] < 1:
            raise ValueError("empty dataset")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features contain non-finite values")
        if labs.ndim != 1 or labs.shape[0] != feats.shape[0]:
            raise ValueError(
                f"labels must be 1-d with one entry per point, got shape {labs.shape} "
                f"for {feats.shape[0]} points"
            )
        if not np.issubdtype(labs.dtype, np.integer):
            raise ValueError("labels must be integers")
        labs = labs.astype(np.int64)
        feats.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != feats.shape[1]:
                raise ValueError(
                    f"{len(names)} feature names for {feats.shape[1]} feature columns"
                )
            object.__setattr__(self, "feature_names", names)

    @property
    def num_points(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        """New dataset holding the selected rows, in the given order."""
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.features[idx], self.labels[idx], self.feature_names)

    def class_ids(self) -> tuple[int, ...]:
        """Distinct labels in ascending order."""
        return tuple(int(c) for c in np.unique(self.labels))


def load_csv(path, label_column: str = "label") -> Dataset:
    """Load a labeled dataset from a CSV file.

    The first row must be a header naming every column; ``label_column``
    selects the label, every other column is a feature (in header order).
    Labels must parse as integers and features as finite floats; violations
    raise ValueError naming the 1-based data row and the column.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty dataset") from None
        if len(set(header)) != len(header):
            raise ValueError(f"{path}: duplicate column names in header")
        if label_column not in header:
            raise ValueError(f"{path}: no column named {label_column!r} in header {header}")
        label_idx = header.index(label_column)
        feature_idx = [i for i in range(len(header)) if i != label_idx]
        if not feature_idx:
            raise ValueError(f"{path}: no feature columns besides {label_column!r}")

        rows: list[list[float]] = []
        labels: list[int] = []
        for rownum, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {len(header)}"
                )
            cell = row[label_idx].strip()
            try:
                label = int(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: row {rownum}, column {label_column!r}: "
                    f"label {cell!r} is not an integer"
                ) from None
            values = []
            for i in feature_idx:
                cell = row[i].strip()
                try:
                    value = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {rownum}, column {header[i]!r}: "
                        f"{cell!r} is not a number"
                    ) from None
                if not math.isfinite(value):
                    raise ValueError(
                        f"{path}: row {rownum}, column {header[i]!r}: non-finite value {cell!r}"
                    )
                values.append(value)
            rows.append(values)
            labels.append(label)

    if not rows:
        raise ValueError(f"{path}: empty dataset")
    names = tuple(header[i] for i in feature_idx)
    return Dataset(np.array(rows, dtype=float), np.array(labels, dtype=np.int64), names)


def load_feature_csv(path, label_column: str | None = None) -> np.ndarray:
    """Load only the feature columns of a CSV file.

    Meant for prediction inputs, which may or may not carry labels: when
    ``label_column`` names a header column it is dropped, otherwise every
    column is a feature. Unlike load_csv a file with no data rows is fine
    and yields a (0, d) array.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            raise ValueError(f"{path}: duplicate column names in header")
        feature_idx = [i for i in range(len(header)) if header[i] != label_column]
        if not feature_idx:
            raise ValueError(f"{path}: no feature columns besides {label_column!r}")

        rows: list[list[float]] = []
        for rownum, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {len(header)}"
                )
            values = []
            for i in feature_idx:
                cell = row[i].strip()
                try:
                    value = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: row {rownum}, column {header[i]!r}: "
                        f"{cell!r} is not a number"
                    ) from None
                if not math.isfinite(value):
                    raise ValueError(
                        f"{path}: row {rownum}, column {header[i]!r}: non-finite value {cell!r}"
                    )
                values.append(value)
            rows.append(values)

    return np.array(rows, dtype=float).reshape(len(rows), len(feature_idx))


def dataset_to_csv(data: Dataset, label_column: str = "label") -> str:
    """Render a dataset as CSV text (header row, label column last).

    Floats are written with repr, which round-trips exactly.
    """
    names = data.feature_names or tuple(f"x{i + 1}" for i in range(data.dim))
    lines = [",".join([*names, label_column])]
    for row, label in zip(data.features, data.labels):
        lines.append(",".join([*(repr(float(v)) for v in row), str(int(label))]))
    return "\n".join(lines) + "\n"


def save_csv(data: Dataset, path, label_column: str = "label") -> None:
    """Write a dataset to ``path`` as CSV via an atomic replace."""
    from ._util import atomic_write_text

    atomic_write_text(path, dataset_to_csv(data, label_column))


def shuffle_split(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministically shuffle and split into (train, test).

    The train side gets ``ceil(train_fraction * num_points)`` points (with a
    tiny epsilon guard so exact products are not pushed up a bucket by float
    rounding). Together the two sides are exactly the input points.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = data.num_points
    n_train = math.ceil(train_fraction * n - 1e-9)
    if n_train < 1 or n_train >= n:
        raise ValueError(
            f"split of {n} points at fraction {train_fraction} leaves an empty side"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return data.subset(perm[:n_train]), data.subset(perm[n_train:])


def _default_class_ids(num_classes: int) -> tuple[int, ...]:
    # two classes -> the binary convention {-1, +1}; otherwise 0..k-1
    if num_classes == 2:
        return (-1, 1)
    return tuple(range(num_classes))


@dataclass(frozen=True)
class BlobSpec:
    """Isotropic Gaussian clusters, one per class.

    ``class_ids=None`` assigns (-1, +1) for two centers and 0..k-1 otherwise.
    """

    centers: tuple[tuple[float, ...], ...]
    counts: tuple[int, ...]
    spread: float = 0.5
    class_ids: tuple[int, ...] | None = None


@dataclass(frozen=True)
class PressureProfileSpec:
    """Pressure-tap-style profile vectors whose shape varies monotonically
    with a per-class angle parameter.

    Each sample is the profile evaluated at ``taps`` equally spaced stations
    plus Gaussian noise. Low angles give a steep leading-edge drop; higher
    angles flatten the drop and lower the plateau, so classes adjacent in
    angle are adjacent in feature space.
    """

    num_classes: int
    counts: tuple[int, ...] | int = 9
    taps: int = 10
    noise: float = 0.05
    angle_start: float = 14.0
    angle_step: float = 2.0
    class_ids: tuple[int, ...] | None = None


def _blob_dataset(spec: BlobSpec, rng: np.random.Generator) -> Dataset:
    centers = np.asarray(spec.centers, dtype=float)
    if centers.ndim != 2 or centers.shape[0] < 1:
        raise ValueError("centers must be a non-empty sequence of equal-length vectors")
    counts = tuple(int(c) for c in spec.counts)
    if len(counts) != centers.shape[0]:
        raise ValueError(f"{len(counts)} counts for {centers.shape[0]} centers")
    if any(c < 1 for c in counts):
        raise ValueError(f"every class needs at least one point, got counts {counts}")
    if not (np.isfinite(spec.spread) and spec.spread > 0):
        raise ValueError(f"spread must be positive, got {spec.spread}")
    ids = spec.class_ids or _default_class_ids(len(counts))
    if len(ids) != len(counts):
        raise ValueError(f"{len(ids)} class ids for {len(counts)} classes")

    blocks = []
    labels = []
    for center, count, cid in zip(centers, counts, ids):
        blocks.append(rng.normal(loc=center, scale=spec.spread, size=(count, centers.shape[1])))
        labels.extend([cid] * count)
    return Dataset(np.vstack(blocks), np.array(labels, dtype=np.int64))


def _profile_dataset(spec: PressureProfileSpec, rng: np.random.Generator) -> Dataset:
    if spec.num_classes < 1:
        raise ValueError("num_classes must be at least 1")
    if spec.taps < 1:
        raise ValueError("taps must be at least 1")
    if not (np.isfinite(spec.noise) and spec.noise >= 0):
        raise ValueError(f"noise must be non-negative, got {spec.noise}")
    counts = spec.counts
    if isinstance(counts, int):
        counts = (counts,) * spec.num_classes
    counts = tuple(int(c) for c in counts)
    if len(counts) != spec.num_classes:
        raise ValueError(f"{len(counts)} counts for {spec.num_classes} classes")
    if any(c < 1 for c in counts):
        raise ValueError(f"every class needs at least one point, got counts {counts}")
    ids = spec.class_ids or _default_class_ids(spec.num_classes)
    if len(ids) != spec.num_classes:
        raise ValueError(f"{len(ids)} class ids for {spec.num_classes} classes")

    stations = np.linspace(0.0, 1.0, spec.taps)
    blocks = []
    labels = []
    for c, (count, cid) in enumerate(zip(counts, ids)):
        angle = spec.angle_start + c * spec.angle_step
        rel = angle - spec.angle_start
        level = -0.08 * rel
        decay = max(0.5, 6.0 - 0.3 * rel)
        profile = level - 1.8 * np.exp(-decay * stations)
        noise = rng.normal(0.0, spec.noise, size=(count, spec.taps)) if spec.noise > 0 else 0.0
        blocks.append(profile[None, :] + noise)
        labels.extend([cid] * count)
    names = tuple(f"p{i + 1}" for i in range(spec.taps))
    return Dataset(np.vstack(blocks), np.array(labels, dtype=np.int64), names)


def generate_synthetic(spec, seed: int) -> Dataset:
    """Generate a synthetic dataset from a BlobSpec or PressureProfileSpec.

    Deterministic: the same spec and seed always produce the identical
    dataset. Classes are drawn in order from a single generator.
    """
    rng = np.random.default_rng(seed)
    if isinstance(spec, BlobSpec):
        return _blob_dataset(spec, rng)
    if isinstance(spec, PressureProfileSpec):
        return _profile_dataset(spec, rng)
    raise TypeError(f"unknown synthetic spec type {type(spec).__name__}")
