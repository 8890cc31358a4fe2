"""One-against-all multiclass classification on top of binary ensembles.

Each class gets its own binary ensemble trained on the full dataset with
labels mapped to +1 (the class) and -1 (everything else). Prediction takes
the argmax of the per-class ensemble decision values; exact ties go to the
lowest class id.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._util import atomic_write_text, derive_seed
from .dataset import Dataset
from .kernels import KernelParams
from .svm import (
    EnsembleModel,
    TrainConfig,
    ensemble_decision_values,
    load_model,
    save_model,
    train_binary,
    train_classical,
)


@dataclass(frozen=True)
class MulticlassModel:
    """Per-class binary ensembles, in ascending class id order."""

    class_ids: tuple[int, ...]
    classifiers: tuple[EnsembleModel, ...]

    def __post_init__(self):
        ids = tuple(int(c) for c in self.class_ids)
        if len(ids) < 2:
            raise ValueError("need at least 2 classes")
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise ValueError(f"class ids must be strictly ascending, got {ids}")
        if len(self.classifiers) != len(ids):
            raise ValueError(f"{len(self.classifiers)} classifiers for {len(ids)} classes")
        object.__setattr__(self, "class_ids", ids)
        object.__setattr__(self, "classifiers", tuple(self.classifiers))


def _resolve_class_ids(data: Dataset, class_ids) -> tuple[int, ...]:
    present = data.class_ids()
    if class_ids is None:
        ids = present
    else:
        ids = tuple(int(c) for c in class_ids)
        counts = {c: int(np.sum(data.labels == c)) for c in ids}
        missing = [c for c, k in counts.items() if k == 0]
        if missing:
            raise ValueError(f"classes with zero points: {missing}")
        unknown = sorted(set(present) - set(ids))
        if unknown:
            raise ValueError(f"labels {unknown} not covered by class ids {ids}")
    if len(ids) < 2:
        raise ValueError(f"need at least 2 distinct classes, got {ids}")
    return ids


def train_multiclass(data: Dataset, config: TrainConfig, class_ids=None) -> MulticlassModel:
    """Train one binary ensemble per class (one-against-all).

    ``class_ids=None`` uses the distinct labels in the data. Each class's
    sampler seed is derived from the schedule's master seed and the class's
    position in ascending id order, so per-class runs are independent and
    the whole training is reproducible from one seed.
    """
    ids = _resolve_class_ids(data, class_ids)
    classifiers = []
    for position, class_id in enumerate(ids):
        relabeled = Dataset(
            data.features,
            np.where(data.labels == class_id, 1, -1).astype(np.int64),
            data.feature_names,
        )
        if config.sampler == "anneal":
            schedule = replace(
                config.schedule, seed=derive_seed(config.schedule.seed, position)
            )
            class_config = replace(config, schedule=schedule)
        else:
            class_config = config
        classifiers.append(train_binary(relabeled, class_config))
    return MulticlassModel(ids, tuple(classifiers))


def train_multiclass_classical(
    data: Dataset, kernel: KernelParams, c_bound: float, class_ids=None
) -> MulticlassModel:
    """One-against-all baseline: each class gets a single classical model
    wrapped as a one-member ensemble."""
    ids = _resolve_class_ids(data, class_ids)
    classifiers = []
    for class_id in ids:
        relabeled = Dataset(
            data.features,
            np.where(data.labels == class_id, 1, -1).astype(np.int64),
            data.feature_names,
        )
        model = train_classical(relabeled, kernel, c_bound)
        classifiers.append(EnsembleModel((model,)))
    return MulticlassModel(ids, tuple(classifiers))


def multiclass_decision_values(model: MulticlassModel, X) -> np.ndarray:
    """Per-class ensemble decision values, shape (num_rows, num_classes)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d feature array, got ndim={X.ndim}")
    columns = [ensemble_decision_values(clf, X) for clf in model.classifiers]
    return np.stack(columns, axis=1)


def predict_multiclass_batch(model: MulticlassModel, X) -> np.ndarray:
    """Predicted class ids for a batch of rows. Ties on the maximum decision
    value resolve to the lowest class id (argmax keeps the first maximum and
    ids ascend)."""
    values = multiclass_decision_values(model, X)
    winners = np.argmax(values, axis=1)
    ids = np.asarray(model.class_ids, dtype=np.int64)
    return ids[winners]


def predict_multiclass(model: MulticlassModel, x) -> int:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d feature vector, got ndim={x.ndim}")
    return int(predict_multiclass_batch(model, x[None, :])[0])


# --- manifest persistence ----------------------------------------------------

MANIFEST_HEADER = "format qubosvm-manifest 1"


def save_multiclass(model: MulticlassModel, path) -> None:
    """Write a manifest plus one model file per class, atomically.

    Member files sit next to the manifest and are recorded by relative name,
    so the group can be moved as a unit.
    """
    path = Path(path)
    lines = [MANIFEST_HEADER, f"num_classes {len(model.class_ids)}"]
    for class_id, classifier in zip(model.class_ids, model.classifiers):
        member_name = f"{path.stem}.class{class_id}.model"
        save_model(classifier, path.parent / member_name)
        lines.append(f"class {class_id} {member_name}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_multiclass(path) -> MulticlassModel:
    path = Path(path)
    lines = [ln.strip() for ln in path.read_text().splitlines()]
    if not lines or lines[0] != MANIFEST_HEADER:
        raise ValueError(f"{path}: not a manifest file (missing {MANIFEST_HEADER!r} header)")
    entries = [(num, ln) for num, ln in enumerate(lines[1:], start=2) if ln and not ln.startswith("#")]
    if not entries or not entries[0][1].startswith("num_classes "):
        raise ValueError(f"{path}: missing num_classes record")
    try:
        expected = int(entries[0][1].split()[1])
    except (IndexError, ValueError):
        raise ValueError(f"{path}: malformed num_classes record") from None

    ids = []
    classifiers = []
    for num, line in entries[1:]:
        parts = line.split(maxsplit=2)
        if len(parts) != 3 or parts[0] != "class":
            raise ValueError(f"{path}: line {num}: expected 'class <id> <file>', got {line!r}")
        try:
            class_id = int(parts[1])
        except ValueError:
            raise ValueError(f"{path}: line {num}: class id {parts[1]!r} is not an integer") from None
        ids.append(class_id)
        classifiers.append(load_model(path.parent / parts[2]))
    if len(ids) != expected:
        raise ValueError(f"{path}: manifest lists {len(ids)} classes, header says {expected}")
    return MulticlassModel(tuple(ids), tuple(classifiers))
