"""Scikit-learn style estimators wrapping the functional core.

These exist so the classifiers compose with the wider ecosystem
(``get_params``/``set_params``, cloning, pipelines). Labels are mapped to
the internal {-1, +1} convention on the way in and back to the caller's
label values on the way out.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import unique_labels
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import Dataset
from .kernels import KernelParams
from .multiclass import (
    multiclass_decision_values,
    predict_multiclass_batch,
    train_multiclass,
)
from .qubo import EncodingParams
from .solver import AnnealSchedule
from .svm import (
    TrainConfig,
    decision_values,
    ensemble_decision_values,
    train_binary,
    train_classical,
)


def _check_training_inputs(estimator, X, y):
    X, y = check_X_y(X, y, dtype=float)
    classes = unique_labels(y)
    if not np.issubdtype(classes.dtype, np.integer):
        raise ValueError("labels must be integers")
    return X, y.astype(np.int64), classes


def _train_config_from(est) -> TrainConfig:
    """Assemble a TrainConfig from the shared sampler/encoding params."""
    return TrainConfig(
        encoding=EncodingParams(
            base=est.base,
            bits_per_alpha=est.bits_per_alpha,
            penalty=est.penalty,
            kernel=KernelParams(kind=est.kernel, gamma=est.gamma),
        ),
        sampler=est.sampler,
        schedule=AnnealSchedule(
            initial_temperature=est.initial_temperature,
            final_temperature=est.final_temperature,
            sweeps=est.sweeps,
            num_reads=est.num_reads,
            seed=est.seed,
        ),
        ensemble_size=est.ensemble_size,
    )


class QuboSvmClassifier(ClassifierMixin, BaseEstimator):
    """Binary kernel SVM trained by sampling a QUBO encoding of its dual.

    Parameters
    ----------
    kernel : {"gaussian", "linear"}, default="gaussian"
    gamma : float, default=1.0
        Gaussian kernel width.
    base : int, default=2
        Base of the positional bit encoding of each dual variable.
    bits_per_alpha : int, default=2
        Binary digits per dual variable; together with ``base`` this fixes
        the box bound C.
    penalty : float, default=0.0
        Weight of the balance-constraint penalty in the encoding.
    sampler : {"anneal", "exhaustive"}, default="anneal"
    ensemble_size : int, default=1
        Number of lowest-energy solutions kept and averaged.
    sweeps, num_reads, initial_temperature, final_temperature :
        Annealing schedule knobs; None lets the temperatures derive from the
        problem coefficients.
    seed : int, default=0
        Master seed for the sampler.

    Attributes
    ----------
    classes_ : ndarray of shape (2,)
        Sorted class values; the smaller maps to -1, the larger to +1.
    model_ : EnsembleModel
        The trained ensemble.
    """

    def __init__(
        self,
        kernel="gaussian",
        gamma=1.0,
        base=2,
        bits_per_alpha=2,
        penalty=0.0,
        sampler="anneal",
        ensemble_size=1,
        sweeps=1000,
        num_reads=64,
        initial_temperature=None,
        final_temperature=None,
        seed=0,
    ):
        self.kernel = kernel
        self.gamma = gamma
        self.base = base
        self.bits_per_alpha = bits_per_alpha
        self.penalty = penalty
        self.sampler = sampler
        self.ensemble_size = ensemble_size
        self.sweeps = sweeps
        self.num_reads = num_reads
        self.initial_temperature = initial_temperature
        self.final_temperature = final_temperature
        self.seed = seed

    def fit(self, X, y):
        X, y, classes = _check_training_inputs(self, X, y)
        if classes.size != 2:
            raise ValueError(
                f"QuboSvmClassifier is binary; got {classes.size} classes. "
                "Use OneVsRestQuboSvm for multiclass data."
            )
        self.classes_ = classes
        signed = np.where(y == classes[1], 1, -1).astype(np.int64)
        self.model_ = train_binary(Dataset(X, signed), _train_config_from(self))
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        return ensemble_decision_values(self.model_, X)

    def predict(self, X) -> np.ndarray:
        values = self.decision_function(X)
        return np.where(values >= 0, self.classes_[1], self.classes_[0])


class OneVsRestQuboSvm(ClassifierMixin, BaseEstimator):
    """One-against-all multiclass wrapper around QUBO-sampled binary SVMs.

    Same parameters as QuboSvmClassifier. Prediction is the argmax of the
    per-class decision values; ties go to the lowest class id.
    """

    def __init__(
        self,
        kernel="gaussian",
        gamma=1.0,
        base=2,
        bits_per_alpha=2,
        penalty=0.0,
        sampler="anneal",
        ensemble_size=1,
        sweeps=1000,
        num_reads=64,
        initial_temperature=None,
        final_temperature=None,
        seed=0,
    ):
        self.kernel = kernel
        self.gamma = gamma
        self.base = base
        self.bits_per_alpha = bits_per_alpha
        self.penalty = penalty
        self.sampler = sampler
        self.ensemble_size = ensemble_size
        self.sweeps = sweeps
        self.num_reads = num_reads
        self.initial_temperature = initial_temperature
        self.final_temperature = final_temperature
        self.seed = seed

    def fit(self, X, y):
        X, y, classes = _check_training_inputs(self, X, y)
        if classes.size < 2:
            raise ValueError("need at least 2 classes")
        self.classes_ = classes
        self.model_ = train_multiclass(
            Dataset(X, y),
            _train_config_from(self),
            class_ids=tuple(int(c) for c in classes),
        )
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        return multiclass_decision_values(self.model_, X)

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        return predict_multiclass_batch(self.model_, X)


class ClassicalSvmClassifier(ClassifierMixin, BaseEstimator):
    """Kernel SVM solved by classical pairwise dual-coordinate updates.

    Parameters
    ----------
    kernel : {"gaussian", "linear"}, default="gaussian"
    gamma : float, default=1.0
    c_bound : float, default=3.0
        Box constraint on the dual variables.
    tol : float, default=1e-6
        Stopping tolerance on the duality violation.
    max_iter : int, default=100000
    """

    def __init__(self, kernel="gaussian", gamma=1.0, c_bound=3.0, tol=1e-6, max_iter=100_000):
        self.kernel = kernel
        self.gamma = gamma
        self.c_bound = c_bound
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y, classes = _check_training_inputs(self, X, y)
        if classes.size != 2:
            raise ValueError(f"ClassicalSvmClassifier is binary; got {classes.size} classes")
        self.classes_ = classes
        signed = np.where(y == classes[1], 1, -1).astype(np.int64)
        self.model_ = train_classical(
            Dataset(X, signed),
            KernelParams(kind=self.kernel, gamma=self.gamma),
            self.c_bound,
            tol=self.tol,
            max_iter=self.max_iter,
        )
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        return decision_values(self.model_, X)

    def predict(self, X) -> np.ndarray:
        values = self.decision_function(X)
        return np.where(values >= 0, self.classes_[1], self.classes_[0])
