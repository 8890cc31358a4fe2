"""Kernel SVM classifiers trained by sampling low-energy solutions of a
QUBO encoding of the dual problem, with a classical solver as baseline.

The functional core lives in the submodules (dataset, kernels, pca, qubo,
solver, svm, multiclass, metrics, pipeline); estimators.py wraps it in
scikit-learn compatible classes and cli.py exposes everything as a command
line tool. The names re-exported here are the public API.
"""

from .dataset import (
    BlobSpec,
    Dataset,
    PressureProfileSpec,
    dataset_to_csv,
    generate_synthetic,
    load_csv,
    load_feature_csv,
    save_csv,
    shuffle_split,
)
from .estimators import ClassicalSvmClassifier, OneVsRestQuboSvm, QuboSvmClassifier
from .kernels import KernelParams, kernel_eval, kernel_matrix
from .metrics import (
    BinaryReport,
    adjacency_errors,
    binary_confusion,
    binary_report,
    confusion,
    format_binary_report,
    format_confusion,
    multiclass_accuracy,
    report_kv_lines,
)
from .multiclass import (
    MulticlassModel,
    load_multiclass,
    multiclass_decision_values,
    predict_multiclass,
    predict_multiclass_batch,
    save_multiclass,
    train_multiclass,
    train_multiclass_classical,
)
from .pca import PcaReducer
from .pipeline import (
    ExperimentResult,
    ExperimentSpec,
    GridPoint,
    apply_bias_adjustment,
    detect_task,
    grid_search,
    load_config,
    run_experiment,
    spec_from_options,
)
from .qubo import (
    EncodingParams,
    IsingProblem,
    QuboProblem,
    build_qubo,
    decode_alphas,
    encode_alphas,
    ising_energy,
    load_qubo,
    max_alpha,
    qubo_energy,
    qubo_from_text,
    qubo_to_ising,
    qubo_to_text,
    save_qubo,
    symmetric_to_upper,
)
from .solver import AnnealSchedule, SampleSet, SolutionSample, solve_anneal, solve_exhaustive
from .svm import (
    BinaryModel,
    EnsembleModel,
    TrainConfig,
    adjust_bias,
    compute_bias,
    decision_function,
    decision_values,
    ensemble_decision,
    ensemble_decision_values,
    kkt_violation,
    load_model,
    predict_labels,
    save_model,
    train_binary,
    train_classical,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "BinaryModel",
    "BinaryReport",
    "BlobSpec",
    "ClassicalSvmClassifier",
    "Dataset",
    "EncodingParams",
    "EnsembleModel",
    "ExperimentResult",
    "ExperimentSpec",
    "GridPoint",
    "IsingProblem",
    "KernelParams",
    "MulticlassModel",
    "OneVsRestQuboSvm",
    "PcaReducer",
    "PressureProfileSpec",
    "QuboProblem",
    "QuboSvmClassifier",
    "SampleSet",
    "SolutionSample",
    "TrainConfig",
    "adjacency_errors",
    "adjust_bias",
    "apply_bias_adjustment",
    "binary_confusion",
    "binary_report",
    "build_qubo",
    "compute_bias",
    "confusion",
    "dataset_to_csv",
    "decision_function",
    "decision_values",
    "decode_alphas",
    "detect_task",
    "encode_alphas",
    "ensemble_decision",
    "ensemble_decision_values",
    "format_binary_report",
    "format_confusion",
    "generate_synthetic",
    "grid_search",
    "ising_energy",
    "kernel_eval",
    "kernel_matrix",
    "kkt_violation",
    "load_config",
    "load_csv",
    "load_feature_csv",
    "load_model",
    "load_multiclass",
    "load_qubo",
    "max_alpha",
    "multiclass_accuracy",
    "multiclass_decision_values",
    "predict_labels",
    "predict_multiclass",
    "predict_multiclass_batch",
    "qubo_energy",
    "qubo_from_text",
    "qubo_to_ising",
    "qubo_to_text",
    "report_kv_lines",
    "run_experiment",
    "save_csv",
    "save_model",
    "save_multiclass",
    "save_qubo",
    "shuffle_split",
    "solve_anneal",
    "solve_exhaustive",
    "spec_from_options",
    "symmetric_to_upper",
    "train_binary",
    "train_classical",
    "train_multiclass",
    "train_multiclass_classical",
]
