"""kNN predictors in standardized feature space, and the two metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels

REGRESSION = "regression"
CLASSIFICATION = "classification"


@dataclass(frozen=True)
class StandardizationParams:
    mean: np.ndarray
    std: np.ndarray

    @property
    def zero_std(self) -> np.ndarray:
        """Mask of features whose training spread is zero."""
        return self.std == 0.0


def fit_standardizer(train_features: np.ndarray) -> StandardizationParams:
    """Per-feature mean and population standard deviation of the training rows."""
    x = np.asarray(train_features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 1:
        raise ValueError("need at least one training record")
    mean, std = kernels.column_stats(x)
    return StandardizationParams(mean=mean, std=std)


def transform(params: StandardizationParams, x: np.ndarray) -> np.ndarray:
    """z-scores; features with zero training spread map to 0."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.mean.shape[0]:
        raise ValueError(
            f"dimension mismatch: got {x.shape[-1]} features, expected {params.mean.shape[0]}"
        )
    safe = np.where(params.std == 0.0, 1.0, params.std)
    z = (x - params.mean) / safe
    return np.where(params.std == 0.0, 0.0, z)


@dataclass(frozen=True)
class KnnModel:
    """Fitted kNN model. Training rows are kept in ascending id order, which
    makes the kernel's row tie-break an id tie-break."""

    k: int
    task: str
    features: np.ndarray  # standardized
    response: np.ndarray
    ids: np.ndarray
    standardizer: StandardizationParams | None = None

    def _neighbors(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if self.standardizer is not None:
            x = transform(self.standardizer, x)
        return kernels.knn_query(self.features, x, self.k)

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Predictions for a batch of raw (unstandardized) feature rows."""
        rows, d2 = self._neighbors(x)
        if self.task == REGRESSION:
            return _mean_rows(self.response[rows])
        labels = self.response[rows]
        return np.array([_mode(labels[q], d2[q]) for q in range(rows.shape[0])])


def fit_knn(
    features: np.ndarray,
    response: np.ndarray,
    k: int,
    task: str = REGRESSION,
    ids: np.ndarray | None = None,
    standardize: bool = True,
) -> KnnModel:
    features = np.asarray(features, dtype=np.float64)
    response = np.asarray(response, dtype=np.float64)
    n = features.shape[0]
    if task not in (REGRESSION, CLASSIFICATION):
        raise ValueError(f"unknown task {task!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds training size {n}")
    ids = np.arange(n) if ids is None else np.asarray(ids, dtype=np.int64)
    if np.any(np.diff(ids) <= 0):
        order = np.argsort(ids, kind="stable")
        ids, features, response = ids[order], features[order], response[order]
    params = fit_standardizer(features) if standardize else None
    stored = transform(params, features) if params is not None else features
    return KnnModel(k=k, task=task, features=np.ascontiguousarray(stored),
                    response=response, ids=ids, standardizer=params)


def knn_fit_predict(
    train_features: np.ndarray,
    train_response: np.ndarray,
    query_features: np.ndarray,
    k: int,
    task: str = REGRESSION,
    standardize: bool = True,
) -> np.ndarray:
    """Fit on the training rows and predict the query rows in one pass.

    Same result as ``fit_knn(...).predict(query)`` for training rows given in
    ascending id order; used by the cross-validation loops.
    """
    n = train_features.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds training size {n}")
    rows, d2, _, _ = kernels.standardized_knn(train_features, query_features, k, standardize)
    labels = np.asarray(train_response)[rows]
    if task == REGRESSION:
        return _mean_rows(labels)
    return np.array([_mode(labels[q], d2[q]) for q in range(rows.shape[0])])


def _mean_rows(values: np.ndarray) -> np.ndarray:
    # left-to-right sum in neighbor order; np.mean's pairwise summation would
    # make results depend on k in ways the reference loop does not
    acc = np.zeros(values.shape[0])
    for j in range(values.shape[1]):
        acc = acc + values[:, j]
    return acc / values.shape[1]


def _mode(labels: np.ndarray, d2: np.ndarray) -> float:
    # most frequent; tie -> label whose nearest member is closest; then smallest label
    best = None
    for lab in np.unique(labels):
        hit = labels == lab
        key = (-int(hit.sum()), float(d2[hit].min()), float(lab))
        if best is None or key < best[0]:
            best = (key, float(lab))
    return best[1]


def predict_regression(model: KnnModel, x: Sequence[float]) -> float:
    if model.task != REGRESSION:
        raise ValueError("model is not a regression model")
    return float(model.predict(np.asarray(x, dtype=np.float64)[None, :])[0])


def predict_classification(model: KnnModel, x: Sequence[float]) -> int:
    if model.task != CLASSIFICATION:
        raise ValueError("model is not a classification model")
    return int(model.predict(np.asarray(x, dtype=np.float64)[None, :])[0])


def _check_pair(predicted, actual) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(predicted, dtype=np.float64).reshape(-1)
    a = np.asarray(actual, dtype=np.float64).reshape(-1)
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.size} predictions vs {a.size} actual values")
    if p.size == 0:
        raise ValueError("metrics need at least one prediction")
    return p, a


def rmse(predicted, actual) -> float:
    p, a = _check_pair(predicted, actual)
    e = p - a
    return math.sqrt(float(np.dot(e, e)) / e.size)


def accuracy(predicted, actual) -> float:
    p, a = _check_pair(predicted, actual)
    return float(np.count_nonzero(p == a)) / p.size


METRICS = {"rmse": rmse, "accuracy": accuracy}
