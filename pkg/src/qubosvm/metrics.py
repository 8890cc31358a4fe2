"""Confusion matrices and the classification indicators derived from them.

Convention throughout: rows are actual classes, columns are predicted
classes. For binary tasks the positive class (+1) is index 0 and the
negative class (-1) is index 1, so counts[0][0] is the true-positive cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def confusion(actual, predicted, num_classes: int) -> np.ndarray:
    """Count matrix with rows = actual class, columns = predicted class.

    Labels must be integers in 0..num_classes-1. Empty inputs give the
    all-zero matrix.
    """
    a = np.asarray(actual, dtype=np.int64).ravel()
    p = np.asarray(predicted, dtype=np.int64).ravel()
    if a.size != p.size:
        raise ValueError(f"{a.size} actual labels vs {p.size} predictions")
    if num_classes < 1:
        raise ValueError(f"num_classes must be >= 1, got {num_classes}")
    for name, arr in (("actual", a), ("predicted", p)):
        if arr.size and (arr.min() < 0 or arr.max() >= num_classes):
            raise ValueError(f"{name} labels outside 0..{num_classes - 1}")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (a, p), 1)
    return cm


def binary_confusion(actual, predicted) -> np.ndarray:
    """2x2 confusion matrix for labels in {-1, +1}, positive class first."""
    a = np.asarray(actual, dtype=np.int64).ravel()
    p = np.asarray(predicted, dtype=np.int64).ravel()
    for name, arr in (("actual", a), ("predicted", p)):
        if not np.all(np.isin(arr, (-1, 1))):
            raise ValueError(f"{name} labels must be -1 or +1")
    # +1 -> index 0, -1 -> index 1
    return confusion((1 - a) // 2, (1 - p) // 2, 2)


@dataclass(frozen=True)
class BinaryReport:
    """Indicator bundle for a 2x2 confusion matrix.

    ``degenerate`` names the indicators whose denominator was zero and were
    therefore reported as 0.0.
    """

    counts: np.ndarray
    accuracy: float
    precision: float
    recall: float
    f1: float
    degenerate: tuple[str, ...]

    @property
    def true_positive(self) -> int:
        return int(self.counts[0, 0])

    @property
    def false_negative(self) -> int:
        return int(self.counts[0, 1])

    @property
    def false_positive(self) -> int:
        return int(self.counts[1, 0])

    @property
    def true_negative(self) -> int:
        return int(self.counts[1, 1])


def _ratio(numerator: float, denominator: float, name: str, degenerate: list[str]) -> float:
    if denominator == 0:
        degenerate.append(name)
        return 0.0
    return numerator / denominator


def binary_report(cm) -> BinaryReport:
    """Accuracy, precision, recall and F1 from a 2x2 confusion matrix."""
    counts = np.asarray(cm, dtype=np.int64)
    if counts.shape != (2, 2):
        raise ValueError(f"expected a 2x2 confusion matrix, got shape {counts.shape}")
    if np.any(counts < 0):
        raise ValueError("confusion matrix counts must be non-negative")
    tp, fn = int(counts[0, 0]), int(counts[0, 1])
    fp, tn = int(counts[1, 0]), int(counts[1, 1])
    degenerate: list[str] = []
    accuracy = _ratio(tp + tn, tp + tn + fp + fn, "accuracy", degenerate)
    precision = _ratio(tp, tp + fp, "precision", degenerate)
    recall = _ratio(tp, tp + fn, "recall", degenerate)
    f1 = _ratio(2 * precision * recall, precision + recall, "f1", degenerate)
    counts.setflags(write=False)
    return BinaryReport(
        counts=counts,
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        degenerate=tuple(degenerate),
    )


def multiclass_accuracy(cm) -> float:
    """Trace over total. An all-zero matrix (no samples) reports 0.0."""
    counts = np.asarray(cm, dtype=np.int64)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
        raise ValueError(f"confusion matrix must be square, got shape {counts.shape}")
    if np.any(counts < 0):
        raise ValueError("confusion matrix counts must be non-negative")
    total = int(counts.sum())
    if total == 0:
        return 0.0
    return float(np.trace(counts) / total)


def adjacency_errors(cm, ordering) -> tuple[int, int]:
    """Split the off-diagonal errors of a confusion matrix by class distance.

    ``ordering`` lists the class indices in their physical order (for
    pressure-profile classes, ascending angle). An error counts as adjacent
    when actual and predicted sit next to each other in that order, distant
    when they are 2 or more positions apart. Returns
    ``(adjacent_errors, distant_errors)``.
    """
    counts = np.asarray(cm, dtype=np.int64)
    k = counts.shape[0]
    if counts.ndim != 2 or counts.shape != (k, k):
        raise ValueError(f"confusion matrix must be square, got shape {counts.shape}")
    order = [int(c) for c in ordering]
    if sorted(order) != list(range(k)):
        raise ValueError(f"ordering must be a permutation of 0..{k - 1}, got {order}")
    position = {cls: pos for pos, cls in enumerate(order)}
    adjacent = 0
    distant = 0
    for actual in range(k):
        for predicted in range(k):
            if actual == predicted:
                continue
            gap = abs(position[actual] - position[predicted])
            if gap == 1:
                adjacent += int(counts[actual, predicted])
            else:
                distant += int(counts[actual, predicted])
    return adjacent, distant


def format_confusion(cm, class_names=None) -> str:
    """Aligned text rendering, rows = actual, columns = predicted."""
    counts = np.asarray(cm, dtype=np.int64)
    k = counts.shape[0]
    names = [str(n) for n in (class_names or range(k))]
    width = max(6, *(len(n) for n in names), len(str(counts.max() if counts.size else 0)))
    header = " " * (width + 9) + " ".join(n.rjust(width) for n in names)
    lines = [header]
    for i in range(k):
        row = " ".join(str(int(v)).rjust(width) for v in counts[i])
        lines.append(f"actual {names[i].rjust(width)}  {row}")
    return "\n".join(lines)


def format_binary_report(report: BinaryReport) -> str:
    """Aligned text block with counts and indicators."""
    lines = [
        format_confusion(report.counts, class_names=["+1", "-1"]),
        "",
        f"accuracy  {report.accuracy:.6f}",
        f"precision {report.precision:.6f}",
        f"recall    {report.recall:.6f}",
        f"f1        {report.f1:.6f}",
    ]
    if report.degenerate:
        lines.append("degenerate (zero denominator): " + ", ".join(report.degenerate))
    return "\n".join(lines)


def report_kv_lines(report: BinaryReport) -> list[str]:
    """Machine-readable key,value lines for the same report."""
    lines = [
        f"tp,{report.true_positive}",
        f"fn,{report.false_negative}",
        f"fp,{report.false_positive}",
        f"tn,{report.true_negative}",
        f"accuracy,{report.accuracy!r}",
        f"precision,{report.precision!r}",
        f"recall,{report.recall!r}",
        f"f1,{report.f1!r}",
    ]
    if report.degenerate:
        lines.append("degenerate," + ";".join(report.degenerate))
    return lines
