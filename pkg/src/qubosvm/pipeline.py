"""End-to-end experiment protocol: load or generate data, reduce with
principal components, repeat shuffle splits, pick hyperparameters by mean
training accuracy, then train and evaluate both the sampled-QUBO classifier
and the classical baseline on identical splits.

Everything is driven by one master seed; per-stage seeds are derived from
it, so a repeated run reproduces every number exactly and results never
depend on evaluation order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import derive_seed, parse_bool, parse_floats, parse_ints, parse_points
from .dataset import BlobSpec, Dataset, PressureProfileSpec, generate_synthetic, load_csv, shuffle_split
from .kernels import KernelParams
from .metrics import adjacency_errors, binary_confusion, confusion, multiclass_accuracy
from .multiclass import (
    MulticlassModel,
    predict_multiclass_batch,
    train_multiclass,
    train_multiclass_classical,
)
from .pca import PcaReducer
from .qubo import EncodingParams, max_alpha
from .solver import AnnealSchedule
from .svm import (
    EnsembleModel,
    TrainConfig,
    adjust_bias,
    ensemble_decision_values,
    predict_labels,
    train_binary,
    train_classical,
)

# seed stream ids
_STREAM_DATA = 0
_STREAM_SPLIT = 1
_STREAM_GRID = 2
_STREAM_FINAL = 3

PCA_POLICIES = ("train", "pooled")


@dataclass(frozen=True)
class GridPoint:
    """One hyperparameter bundle of the search grid."""

    base: int
    bits_per_alpha: int
    penalty: float
    gamma: float


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to run a full experiment.

    Exactly one of ``data_path`` and ``synthetic`` must be set. Grids are
    searched in itertools.product order over (base, bits, penalty, gamma);
    a single-point grid skips the search.
    """

    data_path: str | None = None
    synthetic: BlobSpec | PressureProfileSpec | None = None
    label_column: str = "label"
    pca_dim: int | None = None
    pca_policy: str = "train"
    standardize: bool = False
    num_shuffles: int = 10
    train_fraction: float = 0.75
    kernel_kind: str = "gaussian"
    base_grid: tuple[int, ...] = (2,)
    bits_grid: tuple[int, ...] = (2,)
    penalty_grid: tuple[float, ...] = (0.0,)
    gamma_grid: tuple[float, ...] = (1.0,)
    sampler: str = "anneal"
    sweeps: int = 1000
    num_reads: int = 64
    initial_temperature: float | None = None
    final_temperature: float | None = None
    ensemble_size: int = 1
    bias_adjust: bool = False
    adjust_radius: float = 1.0
    adjust_step: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if (self.data_path is None) == (self.synthetic is None):
            raise ValueError("exactly one of data_path and synthetic must be set")
        if self.pca_policy not in PCA_POLICIES:
            raise ValueError(f"pca_policy must be one of {PCA_POLICIES}, got {self.pca_policy!r}")
        if self.num_shuffles < 1:
            raise ValueError(f"num_shuffles must be >= 1, got {self.num_shuffles}")
        for name in ("base_grid", "bits_grid", "penalty_grid", "gamma_grid"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")

    def grid(self) -> tuple[GridPoint, ...]:
        return tuple(
            GridPoint(base=b, bits_per_alpha=k, penalty=p, gamma=g)
            for b, k, p, g in itertools.product(
                self.base_grid, self.bits_grid, self.penalty_grid, self.gamma_grid
            )
        )

    def train_config(self, point: GridPoint, seed: int) -> TrainConfig:
        kernel = KernelParams(kind=self.kernel_kind, gamma=point.gamma)
        encoding = EncodingParams(
            base=point.base,
            bits_per_alpha=point.bits_per_alpha,
            penalty=point.penalty,
            kernel=kernel,
        )
        schedule = AnnealSchedule(
            initial_temperature=self.initial_temperature,
            final_temperature=self.final_temperature,
            sweeps=self.sweeps,
            num_reads=self.num_reads,
            seed=seed,
        )
        return TrainConfig(
            encoding=encoding,
            sampler=self.sampler,
            schedule=schedule,
            ensemble_size=self.ensemble_size,
        )


@dataclass(frozen=True)
class ExperimentResult:
    """Per-shuffle accuracies and confusion matrices for both classifiers,
    plus their aggregate statistics (population standard deviation)."""

    task: str
    class_ids: tuple[int, ...]
    chosen: GridPoint
    num_train: int
    num_test: int
    qsvm_accuracies: tuple[float, ...]
    classical_accuracies: tuple[float, ...]
    qsvm_confusions: tuple[np.ndarray, ...]
    classical_confusions: tuple[np.ndarray, ...]
    qsvm_adjacency: tuple[tuple[int, int], ...] | None
    classical_adjacency: tuple[tuple[int, int], ...] | None

    @property
    def qsvm_mean(self) -> float:
        return float(np.mean(self.qsvm_accuracies))

    @property
    def classical_mean(self) -> float:
        return float(np.mean(self.classical_accuracies))

    @property
    def qsvm_std(self) -> float:
        return float(np.std(self.qsvm_accuracies))

    @property
    def classical_std(self) -> float:
        return float(np.std(self.classical_accuracies))


def _load_experiment_data(spec: ExperimentSpec) -> Dataset:
    if spec.data_path is not None:
        return load_csv(Path(spec.data_path), spec.label_column)
    return generate_synthetic(spec.synthetic, derive_seed(spec.seed, _STREAM_DATA))


def detect_task(data: Dataset) -> tuple[str, tuple[int, ...]]:
    ids = data.class_ids()
    if len(ids) < 2:
        raise ValueError("need at least 2 distinct classes")
    if ids == (-1, 1):
        return "binary", ids
    if ids[0] >= 0:
        return "multiclass", ids
    raise ValueError(
        f"labels {ids} are neither binary {{-1, +1}} nor non-negative class ids"
    )


def _make_splits(spec: ExperimentSpec, data: Dataset) -> list[tuple[Dataset, Dataset]]:
    """Shuffle splits with the PCA policy applied.

    ``train``: fit the reduction on each shuffle's training half only.
    ``pooled``: fit once on the full dataset before splitting.
    """
    if spec.pca_dim is not None and spec.pca_policy == "pooled":
        reducer = PcaReducer(n_components=spec.pca_dim, standardize=spec.standardize)
        reducer.fit(data.features)
        data = Dataset(reducer.transform(data.features), data.labels)

    splits = []
    for shuffle in range(spec.num_shuffles):
        train, test = shuffle_split(
            data, spec.train_fraction, derive_seed(spec.seed, _STREAM_SPLIT, shuffle)
        )
        if spec.pca_dim is not None and spec.pca_policy == "train":
            reducer = PcaReducer(n_components=spec.pca_dim, standardize=spec.standardize)
            reducer.fit(train.features)
            train = Dataset(reducer.transform(train.features), train.labels)
            test = Dataset(reducer.transform(test.features), test.labels)
        splits.append((train, test))
    return splits


def _train_qsvm(task: str, train: Dataset, config: TrainConfig, class_ids):
    if task == "binary":
        return train_binary(train, config)
    return train_multiclass(train, config, class_ids=class_ids)


def _accuracy_on(task: str, model, data: Dataset) -> float:
    if task == "binary":
        predicted = predict_labels(ensemble_decision_values(model, data.features))
        return float(np.mean(predicted == data.labels))
    predicted = predict_multiclass_batch(model, data.features)
    return float(np.mean(predicted == data.labels))


def grid_search(spec: ExperimentSpec, train_sets: list[Dataset]) -> GridPoint:
    """Pick the grid point with the best mean training accuracy.

    Only training data participates; candidates are compared by the mean
    over the given training sets and ties keep the earliest grid point.
    A single-point grid is returned as-is without any training.
    """
    grid = spec.grid()
    if len(grid) == 1:
        return grid[0]
    task, class_ids = detect_task(train_sets[0])
    best_point = None
    best_mean = -np.inf
    for index, point in enumerate(grid):
        accuracies = []
        for shuffle, train in enumerate(train_sets):
            config = spec.train_config(point, derive_seed(spec.seed, _STREAM_GRID, index, shuffle))
            model = _train_qsvm(task, train, config, class_ids)
            accuracies.append(_accuracy_on(task, model, train))
        mean = float(np.mean(accuracies))
        if mean > best_mean:
            best_mean = mean
            best_point = point
    return best_point


def _evaluate(task: str, model, test: Dataset, class_ids) -> tuple[float, np.ndarray]:
    if task == "binary":
        predicted = predict_labels(ensemble_decision_values(model, test.features))
        cm = binary_confusion(test.labels, predicted)
        return float(np.mean(predicted == test.labels)), cm
    index_of = {c: i for i, c in enumerate(class_ids)}
    unknown = sorted(set(test.labels.tolist()) - set(class_ids))
    if unknown:
        raise ValueError(f"test labels {unknown} not among model classes {class_ids}")
    predicted = predict_multiclass_batch(model, test.features)
    actual_idx = np.array([index_of[int(c)] for c in test.labels])
    predicted_idx = np.array([index_of[int(c)] for c in predicted])
    cm = confusion(actual_idx, predicted_idx, len(class_ids))
    return multiclass_accuracy(cm), cm


def _adjacency(cm: np.ndarray) -> tuple[int, int]:
    return adjacency_errors(cm, range(cm.shape[0]))


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run the full protocol and aggregate the per-shuffle outcomes.

    The classical baseline trains on exactly the same splits and reduced
    features as the sampled classifier, with C set to the largest decodable
    alpha of the chosen encoding and the same kernel.
    """
    data = _load_experiment_data(spec)
    task, class_ids = detect_task(data)
    splits = _make_splits(spec, data)
    chosen = grid_search(spec, [train for train, _ in splits])

    kernel = KernelParams(kind=spec.kernel_kind, gamma=chosen.gamma)
    c_bound = float(max_alpha(chosen.base, chosen.bits_per_alpha))

    qsvm_accs, classical_accs = [], []
    qsvm_cms, classical_cms = [], []
    for shuffle, (train, test) in enumerate(splits):
        config = spec.train_config(chosen, derive_seed(spec.seed, _STREAM_FINAL, shuffle))
        model = _train_qsvm(task, train, config, class_ids)
        if spec.bias_adjust:
            model = apply_bias_adjustment(model, train, spec.adjust_radius, spec.adjust_step)
        acc, cm = _evaluate(task, model, test, class_ids)
        qsvm_accs.append(acc)
        qsvm_cms.append(cm)

        if task == "binary":
            baseline = EnsembleModel((train_classical(train, kernel, c_bound),))
        else:
            baseline = train_multiclass_classical(train, kernel, c_bound, class_ids=class_ids)
        acc, cm = _evaluate(task, baseline, test, class_ids)
        classical_accs.append(acc)
        classical_cms.append(cm)

    if task == "multiclass":
        qsvm_adj = tuple(_adjacency(cm) for cm in qsvm_cms)
        classical_adj = tuple(_adjacency(cm) for cm in classical_cms)
    else:
        qsvm_adj = classical_adj = None

    return ExperimentResult(
        task=task,
        class_ids=class_ids,
        chosen=chosen,
        num_train=splits[0][0].num_points,
        num_test=splits[0][1].num_points,
        qsvm_accuracies=tuple(qsvm_accs),
        classical_accuracies=tuple(classical_accs),
        qsvm_confusions=tuple(qsvm_cms),
        classical_confusions=tuple(classical_cms),
        qsvm_adjacency=qsvm_adj,
        classical_adjacency=classical_adj,
    )


def apply_bias_adjustment(model, train: Dataset, radius: float = 1.0, step: float = 0.01):
    """Post-training bias shift maximizing accuracy on ``train``.

    A binary ensemble is adjusted directly; a multiclass model gets each
    per-class classifier adjusted against its own one-against-all relabeling.
    """
    if isinstance(model, EnsembleModel):
        return adjust_bias(model, train, radius, step)
    adjusted = []
    for class_id, classifier in zip(model.class_ids, model.classifiers):
        relabeled = Dataset(
            train.features, np.where(train.labels == class_id, 1, -1).astype(np.int64)
        )
        adjusted.append(adjust_bias(classifier, relabeled, radius, step))
    return MulticlassModel(model.class_ids, tuple(adjusted))


# --- flat key-value config files ---------------------------------------------


def load_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` config file.

    Blank lines and ``#`` comments are ignored. Keys may not repeat. Values
    are returned as strings; the CLI interprets them exactly like the
    corresponding flags.
    """
    path = Path(path)
    options: dict[str, str] = {}
    for num, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}: line {num}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValueError(f"{path}: line {num}: empty key")
        if key in options:
            raise ValueError(f"{path}: line {num}: duplicate key {key!r}")
        options[key] = value
    return options


def _convert(key: str, value: str, conv):
    try:
        return conv(value)
    except (ValueError, TypeError):
        raise ValueError(f"config key {key!r}: cannot parse {value!r}") from None


def _pop_required(opts: dict[str, str], key: str) -> str:
    try:
        return opts.pop(key)
    except KeyError:
        raise ValueError(f"config key {key!r} is required here") from None


def _pop_synthetic(opts: dict[str, str]):
    kind = opts.pop("synthetic", None)
    if kind is None:
        return None
    if kind == "blobs":
        spec = BlobSpec(
            centers=_convert("blob_centers", _pop_required(opts, "blob_centers"), parse_points),
            counts=_convert("blob_counts", _pop_required(opts, "blob_counts"), parse_ints),
            spread=_convert("blob_spread", opts.pop("blob_spread", "0.5"), float),
            class_ids=(
                _convert("blob_class_ids", opts.pop("blob_class_ids"), parse_ints)
                if "blob_class_ids" in opts
                else None
            ),
        )
    elif kind == "profiles":
        spec = PressureProfileSpec(
            num_classes=_convert("profile_classes", _pop_required(opts, "profile_classes"), int),
            counts=(
                _convert("profile_counts", opts.pop("profile_counts"), parse_ints)
                if "profile_counts" in opts
                else 9
            ),
            taps=_convert("profile_taps", opts.pop("profile_taps", "10"), int),
            noise=_convert("profile_noise", opts.pop("profile_noise", "0.05"), float),
            angle_start=_convert("profile_angle_start", opts.pop("profile_angle_start", "14"), float),
            angle_step=_convert("profile_angle_step", opts.pop("profile_angle_step", "2"), float),
            class_ids=(
                _convert("profile_class_ids", opts.pop("profile_class_ids"), parse_ints)
                if "profile_class_ids" in opts
                else None
            ),
        )
    else:
        raise ValueError(f"config key 'synthetic': expected 'blobs' or 'profiles', got {kind!r}")
    return spec


def spec_from_options(options: dict[str, str]) -> ExperimentSpec:
    """Build an ExperimentSpec from flat string options (config file keys
    mirror the ExperimentSpec field names; synthetic data uses the
    ``synthetic`` selector plus ``blob_*`` or ``profile_*`` keys)."""
    opts = dict(options)
    kwargs: dict = {}

    synthetic = _pop_synthetic(opts)
    if synthetic is not None:
        kwargs["synthetic"] = synthetic
    if "data_path" in opts:
        kwargs["data_path"] = opts.pop("data_path")

    plain = {
        "label_column": str,
        "pca_policy": str,
        "kernel_kind": str,
        "sampler": str,
        "pca_dim": int,
        "num_shuffles": int,
        "sweeps": int,
        "num_reads": int,
        "ensemble_size": int,
        "seed": int,
        "train_fraction": float,
        "initial_temperature": float,
        "final_temperature": float,
        "adjust_radius": float,
        "adjust_step": float,
        "standardize": parse_bool,
        "bias_adjust": parse_bool,
        "base_grid": parse_ints,
        "bits_grid": parse_ints,
        "penalty_grid": parse_floats,
        "gamma_grid": parse_floats,
    }
    for key, conv in plain.items():
        if key in opts:
            kwargs[key] = _convert(key, opts.pop(key), conv)

    if opts:
        raise ValueError(f"unknown config keys: {', '.join(sorted(opts))}")
    return ExperimentSpec(**kwargs)
