"""Binary kernel SVMs built from sampled QUBO solutions, plus a classical
dual-solver baseline and a text model format.

A trained model keeps its training points: the decision function is
f(x) = sum_n alphas[n] * labels[n] * kernel(x_n, x) + bias, and the
predicted label is +1 when f(x) >= 0, else -1 (f(x) == 0 maps to +1).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._util import atomic_write_text, format_real
from .dataset import Dataset
from .kernels import KernelParams, kernel_matrix
from .qubo import EncodingParams, build_qubo, decode_alphas, max_alpha
from .solver import AnnealSchedule, solve_anneal, solve_exhaustive

BIAS_DENOMINATOR_FLOOR = 1e-12

SAMPLER_KINDS = ("anneal", "exhaustive")


def _require_binary(labels: np.ndarray) -> None:
    if not np.all(np.isin(labels, (-1, 1))):
        raise ValueError("binary labels in {-1, +1} required")
    if np.unique(labels).size < 2:
        raise ValueError("single-class dataset: need both +1 and -1 labels")


@dataclass(frozen=True)
class BinaryModel:
    """One binary classifier: dual coefficients over its training points.

    ``degenerate`` marks a model whose bias denominator vanished (bias was
    forced to 0); ``converged`` is False when the iterative classical solver
    hit its iteration cap.
    """

    alphas: np.ndarray
    bias: float
    data: Dataset
    kernel: KernelParams
    c_bound: float
    degenerate: bool = False
    converged: bool = True

    def __post_init__(self):
        alphas = np.array(self.alphas, dtype=float)
        if alphas.shape != (self.data.num_points,):
            raise ValueError(
                f"{alphas.shape[0] if alphas.ndim == 1 else alphas.shape} alphas "
                f"for {self.data.num_points} training points"
            )
        if not np.all(np.isfinite(alphas)):
            raise ValueError("alphas contain non-finite values")
        if np.any(alphas < -1e-9) or np.any(alphas > self.c_bound + 1e-9):
            raise ValueError(f"alphas outside [0, {self.c_bound}]")
        if not (np.isfinite(self.bias) and np.isfinite(self.c_bound) and self.c_bound > 0):
            raise ValueError("bias and c_bound must be finite, c_bound positive")
        _require_binary(self.data.labels)
        alphas.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "c_bound", float(self.c_bound))


def compute_bias(alphas, data: Dataset, kernel: KernelParams, c_bound: float) -> tuple[float, bool]:
    """Bias that best balances the margins, weighted toward box-interior
    support vectors.

    Averages ``label_n - sum_m alphas[m] label[m] kernel(x_m, x_n)`` over the
    training points with weights ``alphas * (c_bound - alphas)``, which are
    zero at both box edges. Returns ``(bias, degenerate)``; when the weight
    sum is at or below 1e-12 the bias is 0.0 and the flag is True.
    """
    a = np.asarray(alphas, dtype=float)
    t = data.labels.astype(float)
    if a.shape != t.shape:
        raise ValueError(f"{a.size} alphas for {t.size} training points")
    weights = a * (c_bound - a)
    denominator = float(weights.sum())
    if denominator <= BIAS_DENOMINATOR_FLOOR:
        return 0.0, True
    gram = kernel_matrix(kernel, data.features)
    residuals = t - gram @ (a * t)
    return float((weights * residuals).sum() / denominator), False


def decision_values(model: BinaryModel, X) -> np.ndarray:
    """Decision function on a batch of rows, shape (m,)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d feature array, got ndim={X.ndim}")
    cross = kernel_matrix(model.kernel, X, model.data.features)
    return cross @ (model.alphas * model.data.labels.astype(float)) + model.bias


def decision_function(model: BinaryModel, x) -> float:
    """Decision value for a single feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d feature vector, got ndim={x.ndim}")
    return float(decision_values(model, x[None, :])[0])


def predict_labels(values) -> np.ndarray:
    """Map decision values to {-1, +1}; exactly 0 maps to +1."""
    return np.where(np.asarray(values, dtype=float) >= 0, 1, -1).astype(np.int64)


@dataclass(frozen=True)
class EnsembleModel:
    """Members in ascending training-energy order over shared training data.

    The ensemble decision value is the arithmetic mean of the member
    decision values. ``encoding`` records how the members were produced
    (None for the classical baseline).
    """

    members: tuple[BinaryModel, ...]
    encoding: EncodingParams | None = None

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("an ensemble needs at least one member")
        first = members[0]
        for m in members[1:]:
            if (
                m.kernel != first.kernel
                or m.c_bound != first.c_bound
                or not np.array_equal(m.data.features, first.data.features)
                or not np.array_equal(m.data.labels, first.data.labels)
            ):
                raise ValueError("ensemble members must share training data, kernel and c_bound")
        if self.encoding is not None:
            if self.encoding.kernel != first.kernel:
                raise ValueError("encoding kernel differs from member kernel")
            if float(self.encoding.c_bound) != first.c_bound:
                raise ValueError("encoding c_bound differs from member c_bound")
        object.__setattr__(self, "members", members)

    @property
    def kernel(self) -> KernelParams:
        return self.members[0].kernel

    @property
    def c_bound(self) -> float:
        return self.members[0].c_bound

    @property
    def data(self) -> Dataset:
        return self.members[0].data


def ensemble_decision_values(model: EnsembleModel, X) -> np.ndarray:
    """Mean of the member decision functions on a batch of rows."""
    stacked = np.stack([decision_values(m, X) for m in model.members])
    return stacked.sum(axis=0) / len(model.members)


def ensemble_decision(model: EnsembleModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d feature vector, got ndim={x.ndim}")
    return float(ensemble_decision_values(model, x[None, :])[0])


@dataclass(frozen=True)
class TrainConfig:
    """Sampler choice and encoding for QUBO-based training."""

    encoding: EncodingParams = EncodingParams()
    sampler: str = "anneal"
    schedule: AnnealSchedule = AnnealSchedule()
    ensemble_size: int = 1

    def __post_init__(self):
        if self.sampler not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler {self.sampler!r}, expected one of {SAMPLER_KINDS}")
        if self.ensemble_size < 1:
            raise ValueError(f"ensemble_size must be >= 1, got {self.ensemble_size}")


def train_binary(data: Dataset, config: TrainConfig) -> EnsembleModel:
    """Train a binary ensemble by sampling low-energy QUBO solutions.

    Builds the QUBO for the dataset, samples it with the configured solver,
    decodes the ``ensemble_size`` lowest-energy distinct solutions into dual
    coefficients, and fits each member's bias. If the sampler finds fewer
    distinct solutions than requested, the ensemble simply has fewer members.
    """
    _require_binary(data.labels)
    if data.num_points < 2:
        raise ValueError("need at least 2 training points")
    problem = build_qubo(data, config.encoding)
    if config.sampler == "exhaustive":
        samples = solve_exhaustive(problem, top_k=config.ensemble_size)
    else:
        samples = solve_anneal(problem, config.schedule, top_k=config.ensemble_size)

    c = float(max_alpha(config.encoding.base, config.encoding.bits_per_alpha))
    members = []
    for sample in samples:
        alphas = decode_alphas(sample.bits, config.encoding.base, config.encoding.bits_per_alpha)
        bias, degenerate = compute_bias(alphas, data, config.encoding.kernel, c)
        members.append(
            BinaryModel(
                alphas=alphas,
                bias=bias,
                data=data,
                kernel=config.encoding.kernel,
                c_bound=c,
                degenerate=degenerate,
            )
        )
    return EnsembleModel(tuple(members), encoding=config.encoding)


def adjust_bias(
    model: EnsembleModel, data: Dataset, radius: float = 1.0, step: float = 0.01
) -> EnsembleModel:
    """Shift every member bias by the common offset that maximizes accuracy
    on ``data`` (normally the training set).

    The offset is scanned over [-radius, +radius] in ``step`` increments;
    ties prefer the smallest magnitude, then the smallest value, so a model
    that cannot be improved comes back unchanged (offset 0).
    """
    if not (np.isfinite(radius) and radius > 0):
        raise ValueError(f"radius must be positive, got {radius}")
    if not (np.isfinite(step) and 0 < step <= 2 * radius):
        raise ValueError(f"step must be in (0, {2 * radius}], got {step}")
    _require_binary(data.labels)

    count = int(round(2 * radius / step)) + 1
    offsets = np.linspace(-radius, radius, count)
    values = ensemble_decision_values(model, data.features)
    predictions = np.where(values[None, :] + offsets[:, None] >= 0, 1, -1)
    accuracies = (predictions == data.labels[None, :]).mean(axis=1)
    ranked = np.lexsort((offsets, np.abs(offsets), -accuracies))
    offset = float(offsets[ranked[0]])

    members = tuple(replace(m, bias=m.bias + offset) for m in model.members)
    return EnsembleModel(members, encoding=model.encoding)


def train_classical(
    data: Dataset,
    kernel: KernelParams,
    c_bound: float,
    tol: float = 1e-6,
    max_iter: int = 100_000,
) -> BinaryModel:
    """Solve the continuous dual problem with pairwise coordinate updates.

    Repeatedly picks the most-violating pair of dual variables (one from
    each side of the balance constraint), solves the two-variable subproblem
    in closed form, and stops when the duality violation m - M drops to
    ``tol``. The balance constraint holds exactly throughout because every
    update moves the pair along it. The bias is then fitted the same way as
    for sampled models.
    """
    _require_binary(data.labels)
    if data.num_points < 2:
        raise ValueError("need at least 2 training points")
    if not (np.isfinite(c_bound) and c_bound > 0):
        raise ValueError(f"c_bound must be positive, got {c_bound}")

    t = data.labels.astype(float)
    n = data.num_points
    gram = kernel_matrix(kernel, data.features)
    Q = np.outer(t, t) * gram

    alphas = np.zeros(n)
    gradient = -np.ones(n)  # gradient of the dual objective at alphas = 0
    snap = 1e-12 * max(1.0, c_bound)
    converged = False

    for _ in range(max_iter):
        tg = -t * gradient
        up = ((t > 0) & (alphas < c_bound)) | ((t < 0) & (alphas > 0))
        low = ((t > 0) & (alphas > 0)) | ((t < 0) & (alphas < c_bound))
        if not up.any() or not low.any():
            converged = True
            break
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = int(up_idx[np.argmax(tg[up_idx])])
        j = int(low_idx[np.argmin(tg[low_idx])])
        if tg[i] - tg[j] <= tol:
            converged = True
            break

        # closed-form update of the pair, clipped to the box
        errors = t * gradient  # f(x_n) - t_n, without bias
        eta = max(gram[i, i] + gram[j, j] - 2.0 * gram[i, j], 1e-12)
        old_i, old_j = alphas[i], alphas[j]
        new_j = old_j + t[j] * (errors[i] - errors[j]) / eta
        if t[i] != t[j]:
            lo_box, hi_box = max(0.0, old_j - old_i), min(c_bound, c_bound + old_j - old_i)
        else:
            lo_box, hi_box = max(0.0, old_i + old_j - c_bound), min(c_bound, old_i + old_j)
        new_j = min(hi_box, max(lo_box, new_j))
        new_i = old_i + t[i] * t[j] * (old_j - new_j)
        for idx, value in ((i, new_i), (j, new_j)):
            if value < snap:
                value = 0.0
            elif value > c_bound - snap:
                value = c_bound
            gradient += (value - alphas[idx]) * Q[:, idx]
            alphas[idx] = value

    if not converged:
        warnings.warn(
            f"pairwise dual solver hit the iteration cap ({max_iter}) before reaching "
            f"tolerance {tol}; returning the best iterate",
            RuntimeWarning,
            stacklevel=2,
        )
    bias, degenerate = compute_bias(alphas, data, kernel, c_bound)
    return BinaryModel(
        alphas=alphas,
        bias=bias,
        data=data,
        kernel=kernel,
        c_bound=float(c_bound),
        degenerate=degenerate,
        converged=converged,
    )


def kkt_violation(model: BinaryModel) -> float:
    """Largest duality violation m - M of a model's dual coefficients
    (non-positive means the optimality conditions hold exactly)."""
    t = model.data.labels.astype(float)
    gram = kernel_matrix(model.kernel, model.data.features)
    gradient = (np.outer(t, t) * gram) @ model.alphas - 1.0
    tg = -t * gradient
    up = ((t > 0) & (model.alphas < model.c_bound)) | ((t < 0) & (model.alphas > 0))
    low = ((t > 0) & (model.alphas > 0)) | ((t < 0) & (model.alphas < model.c_bound))
    if not up.any() or not low.any():
        return 0.0
    return float(tg[up].max() - tg[low].min())


# --- text persistence -------------------------------------------------------

MODEL_HEADER = "format qubosvm-model 1"


def model_to_text(model: EnsembleModel) -> str:
    """Serialize an ensemble (or a wrapped single model) losslessly.

    All reals are written with 17 significant digits, so a load/save round
    trip reproduces decision values exactly.
    """
    data = model.data
    kernel = model.kernel
    lines = [
        MODEL_HEADER,
        f"kind {kernel.kind}",
        f"gamma {format_real(kernel.gamma)}",
        f"c_bound {format_real(model.c_bound)}",
    ]
    if model.encoding is not None:
        lines += [
            f"base {model.encoding.base}",
            f"bits_per_alpha {model.encoding.bits_per_alpha}",
            f"penalty {format_real(model.encoding.penalty)}",
        ]
    lines += [
        f"num_points {data.num_points}",
        f"num_features {data.dim}",
        f"num_members {len(model.members)}",
        "labels " + " ".join(str(int(v)) for v in data.labels),
    ]
    for row in data.features:
        lines.append("point " + " ".join(format_real(v) for v in row))
    for index, member in enumerate(model.members):
        lines += [
            f"member {index}",
            f"bias {format_real(member.bias)}",
            f"degenerate {int(member.degenerate)}",
            f"converged {int(member.converged)}",
            "alphas " + " ".join(format_real(v) for v in member.alphas),
        ]
    return "\n".join(lines) + "\n"


def save_model(model: EnsembleModel | BinaryModel, path) -> None:
    """Write a model file atomically. A bare BinaryModel is stored as a
    single-member ensemble."""
    if isinstance(model, BinaryModel):
        model = EnsembleModel((model,))
    atomic_write_text(path, model_to_text(model))


class _LineReader:
    def __init__(self, text: str, source: str):
        self.lines = text.splitlines()
        self.source = source
        self.pos = 0

    def next_record(self, expected_key: str) -> list[str]:
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] != expected_key:
                raise ValueError(
                    f"{self.source}: line {self.pos}: expected {expected_key!r}, got {parts[0]!r}"
                )
            return parts[1:]
        raise ValueError(f"{self.source}: unexpected end of file, expected {expected_key!r}")

    def peek_key(self) -> str | None:
        pos = self.pos
        while pos < len(self.lines):
            line = self.lines[pos].strip()
            if line and not line.startswith("#"):
                return line.split()[0]
            pos += 1
        return None


def model_from_text(text: str, source: str = "<text>") -> EnsembleModel:
    reader = _LineReader(text, source)
    first = reader.lines[0].strip() if reader.lines else ""
    if first != MODEL_HEADER:
        raise ValueError(f"{source}: not a model file (missing {MODEL_HEADER!r} header)")
    reader.pos = 1

    kind = reader.next_record("kind")[0]
    gamma = float(reader.next_record("gamma")[0])
    kernel = KernelParams(kind=kind, gamma=gamma)
    c_bound = float(reader.next_record("c_bound")[0])

    encoding = None
    if reader.peek_key() == "base":
        base = int(reader.next_record("base")[0])
        bits_per_alpha = int(reader.next_record("bits_per_alpha")[0])
        penalty = float(reader.next_record("penalty")[0])
        encoding = EncodingParams(
            base=base, bits_per_alpha=bits_per_alpha, penalty=penalty, kernel=kernel
        )

    num_points = int(reader.next_record("num_points")[0])
    num_features = int(reader.next_record("num_features")[0])
    num_members = int(reader.next_record("num_members")[0])
    labels = [int(v) for v in reader.next_record("labels")]
    if len(labels) != num_points:
        raise ValueError(f"{source}: {len(labels)} labels for {num_points} points")
    rows = []
    for _ in range(num_points):
        row = [float(v) for v in reader.next_record("point")]
        if len(row) != num_features:
            raise ValueError(
                f"{source}: point with {len(row)} features, expected {num_features}"
            )
        rows.append(row)
    data = Dataset(np.array(rows, dtype=float), np.array(labels, dtype=np.int64))

    members = []
    for expected in range(num_members):
        index = int(reader.next_record("member")[0])
        if index != expected:
            raise ValueError(f"{source}: member {index} out of order, expected {expected}")
        bias = float(reader.next_record("bias")[0])
        degenerate = bool(int(reader.next_record("degenerate")[0]))
        converged = bool(int(reader.next_record("converged")[0]))
        alphas = np.array([float(v) for v in reader.next_record("alphas")], dtype=float)
        members.append(
            BinaryModel(
                alphas=alphas,
                bias=bias,
                data=data,
                kernel=kernel,
                c_bound=c_bound,
                degenerate=degenerate,
                converged=converged,
            )
        )
    return EnsembleModel(tuple(members), encoding=encoding)


def load_model(path) -> EnsembleModel:
    path = Path(path)
    return model_from_text(path.read_text(), source=str(path))
