"""Gaussian naive Bayes and exhaustive k-nearest neighbours."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Standardizer, fit_standardizer

DEFAULT_VARIANCE_FLOOR = 1e-9


def _binary_labels(labels) -> np.ndarray:
    y = np.asarray(labels)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    return y.astype(np.int64)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# naive Bayes


@dataclass(frozen=True)
class GaussianNbModel:
    """Row ``c`` of ``means``/``variances`` holds class ``c``'s moments."""

    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def predict_proba(self, X) -> np.ndarray:
        return nb_posterior(self, X)

    def predict(self, X) -> np.ndarray:
        return predict_nb(self, X)


def fit_gaussian_nb(X, labels, variance_floor: float = DEFAULT_VARIANCE_FLOOR) -> GaussianNbModel:
    """Class priors and per-class feature means/variances (ddof=0).

    Each variance is floored at ``variance_floor`` times the largest
    per-feature variance of the whole training matrix.
    """
    X = np.asarray(X, dtype=float)
    y = _binary_labels(labels)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X shape {X.shape} does not match {y.shape[0]} labels")
    counts = np.bincount(y, minlength=2)
    if (counts == 0).any():
        raise ValueError("naive Bayes needs both classes in the training labels")
    means = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
    variances = np.stack([X[y == c].var(axis=0) for c in (0, 1)])
    floor = variance_floor * X.var(axis=0).max()
    if floor <= 0:
        floor = variance_floor
    variances = np.maximum(variances, floor)
    return GaussianNbModel(_frozen(counts / y.size), _frozen(means), _frozen(variances))


def nb_log_joint(model: GaussianNbModel, X) -> np.ndarray:
    """``log p(c) + log p(x | c)`` for each row and class, shape (n, 2)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} feature columns, got shape {X.shape}")
    out = np.empty((X.shape[0], 2))
    for c in (0, 1):
        var = model.variances[c]
        ll = -0.5 * (np.log(2 * np.pi * var) + (X - model.means[c]) ** 2 / var)
        out[:, c] = np.log(model.priors[c]) + ll.sum(axis=1)
    return out


def nb_posterior(model: GaussianNbModel, X) -> np.ndarray:
    """Posterior ``(p0, p1)`` per row from the log-joint difference.

    With two classes ``p1 = sigmoid(j1 - j0)``. The smaller posterior is
    ``exp(-logaddexp(0, |j1 - j0|))`` and the larger its complement, so rows
    sum to 1 and a tie gives exactly (0.5, 0.5).
    """
    joint = nb_log_joint(model, X)
    diff = joint[:, 1] - joint[:, 0]
    small = np.exp(-np.logaddexp(0.0, np.abs(diff)))
    p1 = np.where(diff > 0, 1.0 - small, small)
    return np.column_stack([1.0 - p1, p1])


def predict_nb(model: GaussianNbModel, X) -> np.ndarray:
    """Argmax of the log joint; ties go to class 0."""
    joint = nb_log_joint(model, X)
    return (joint[:, 1] > joint[:, 0]).astype(np.int64)


# ---------------------------------------------------------------------------
# k-nearest neighbours


@dataclass(frozen=True)
class KnnParams:
    n_neighbors: int = 5

    def __post_init__(self):
        if int(self.n_neighbors) < 1:
            raise ValueError(f"n_neighbors must be >= 1, got {self.n_neighbors}")


@dataclass(frozen=True)
class KnnModel:
    train: np.ndarray  # stored in the (possibly standardized) search space
    labels: np.ndarray
    params: KnnParams
    standardizer: Standardizer | None = None

    def predict(self, X) -> np.ndarray:
        return knn_predict(self, X)


def fit_knn(X, labels, params: KnnParams = KnnParams(), standardize: bool = True) -> KnnModel:
    X = np.asarray(X, dtype=float)
    y = _binary_labels(labels)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise ValueError(f"X shape {X.shape} does not match {y.shape[0]} labels")
    if params.n_neighbors > X.shape[0]:
        raise ValueError(f"n_neighbors={params.n_neighbors} exceeds the {X.shape[0]} training rows")
    std = fit_standardizer(X) if standardize else None
    train = std.transform(X) if std is not None else X
    lab = np.array(y)
    lab.setflags(write=False)
    return KnnModel(_frozen(train), lab, params, std)


def knn_neighbors(model: KnnModel, Q, k: int | None = None, chunk_size: int = 512) -> np.ndarray:
    """Indices of the ``k`` nearest stored rows per query, shape (m, k).

    Neighbours come in ascending (distance, training-row index) order, so
    equidistant rows at the boundary go to the lower index and the
    neighbours for any smaller k are a prefix. ``k`` defaults to the
    model's ``n_neighbors``.
    """
    Q = np.asarray(Q, dtype=float)
    train = model.train
    if Q.ndim != 2 or Q.shape[1] != train.shape[1]:
        raise ValueError(f"expected {train.shape[1]} feature columns, got shape {Q.shape}")
    k = int(model.params.n_neighbors if k is None else k)
    n = train.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"n_neighbors={k} must be between 1 and the {n} stored rows")
    if model.standardizer is not None:
        Q = model.standardizer.transform(Q)
    out = np.empty((Q.shape[0], k), dtype=np.int64)
    for start in range(0, Q.shape[0], chunk_size):
        q = Q[start : start + chunk_size]
        d2 = np.zeros((q.shape[0], n))
        for j in range(train.shape[1]):
            d2 += (q[:, j, None] - train[None, :, j]) ** 2
        if k < n:
            kth = np.partition(d2, k - 1, axis=1)[:, k - 1 : k]
            rows, cols = np.nonzero(d2 <= kth)
        else:
            rows, cols = np.nonzero(np.ones_like(d2, dtype=bool))
        # order candidates by (row, distance, index)
        order = np.lexsort((cols, d2[rows, cols], rows))
        rows, cols = rows[order], cols[order]
        first = np.searchsorted(rows, np.arange(q.shape[0]))
        rank = np.arange(rows.size) - first[rows]
        keep = rank < k
        out[start + rows[keep], rank[keep]] = cols[keep]
    return out


def knn_vote(labels_of_neighbors: np.ndarray) -> np.ndarray:
    """Majority of each row of 0/1 neighbour labels; a tied vote goes to class 0."""
    ones = labels_of_neighbors.sum(axis=1)
    return (2 * ones > labels_of_neighbors.shape[1]).astype(np.int64)


def knn_predict(model: KnnModel, Q, chunk_size: int = 512) -> np.ndarray:
    """Majority vote of the k nearest neighbours under Euclidean distance."""
    idx = knn_neighbors(model, Q, chunk_size=chunk_size)
    return knn_vote(model.labels[idx])


def knn_predict_many(model: KnnModel, Q, ks) -> dict:
    """Predictions for several k from one neighbour search: ``{k: classes}``."""
    ks = [int(k) for k in ks]
    idx = knn_neighbors(model, Q, k=max(ks))
    lab = model.labels[idx]
    return {k: knn_vote(lab[:, :k]) for k in ks}
