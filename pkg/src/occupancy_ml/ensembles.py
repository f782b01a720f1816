"""Random forest (bagged Gini trees, probability averaging) and gradient
boosting with logistic loss over regression trees."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .trees import CLASSIFICATION, REGRESSION, TrainedTree, TreeParams, fit_tree, predict_tree

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(random_state: int, index: int) -> int:
    """Seed of the ``index``-th child stream: ``splitmix64(splitmix64(seed) + index)``.

    Child streams depend only on (seed, index), never on scheduling order.
    """
    return splitmix64((splitmix64(int(random_state) & _MASK64) + int(index)) & _MASK64)


def bootstrap_sample(n: int, rng: np.random.Generator | int) -> np.ndarray:
    """``n`` row indices drawn uniformly from ``[0, n)`` with replacement."""
    if n < 1:
        raise ValueError("bootstrap needs n >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return rng.integers(0, n, size=n)


# ---------------------------------------------------------------------------
# random forest


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    random_state: int = 0
    # "all", "sqrt", or None: all features for <= 2 columns, sqrt otherwise
    max_features_rule: str | None = None
    bootstrap: bool = True

    def __post_init__(self):
        if int(self.n_estimators) < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.max_features_rule not in (None, "all", "sqrt"):
            raise ValueError(f"max_features_rule must be 'all', 'sqrt' or None, got {self.max_features_rule!r}")
        TreeParams(self.max_depth, self.min_samples_split, self.random_state)

    def max_features(self, n_features: int) -> int:
        rule = self.max_features_rule
        if rule is None:
            rule = "all" if n_features <= 2 else "sqrt"
        if rule == "all":
            return n_features
        return max(1, int(math.sqrt(n_features)))


@dataclass(frozen=True)
class TrainedForest:
    trees: tuple
    params: ForestParams
    n_features: int

    def predict_proba(self, X) -> np.ndarray:
        return predict_forest_proba(self, X)

    def predict(self, X) -> np.ndarray:
        return predict_forest(self, X)


def _fit_member(X, y, params: ForestParams, index: int, max_features: int) -> TrainedTree:
    rng = np.random.default_rng(derive_seed(params.random_state, index))
    tree_params = TreeParams(params.max_depth, params.min_samples_split, params.random_state)
    if params.bootstrap:
        rows = bootstrap_sample(X.shape[0], rng)
        X, y = X[rows], y[rows]
    return fit_tree(X, y, tree_params, CLASSIFICATION, max_features=max_features, rng=rng)


def fit_random_forest(X, labels, params: ForestParams = ForestParams(), n_jobs: int = 1) -> TrainedForest:
    """Fit ``n_estimators`` trees, each on its own bootstrap sample and
    random stream. ``n_jobs > 1`` fits trees on a thread pool; the result is
    identical to the sequential fit."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot fit a forest on an empty training set")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("forest labels must be 0/1")
    max_features = params.max_features(X.shape[1])

    def member(i):
        return _fit_member(X, y, params, i, max_features)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = tuple(pool.map(member, range(params.n_estimators)))
    else:
        trees = tuple(member(i) for i in range(params.n_estimators))
    return TrainedForest(trees, params, X.shape[1])


def predict_forest_proba(forest: TrainedForest, X) -> np.ndarray:
    """Mean of the trees' class-1 leaf fractions."""
    votes = np.stack([predict_tree(t, X) for t in forest.trees])
    # sorting first makes the sum independent of tree order, bit for bit
    return np.sort(votes, axis=0).sum(axis=0) / len(forest.trees)


def predict_forest(forest: TrainedForest, X) -> np.ndarray:
    return (predict_forest_proba(forest, X) > 0.5).astype(np.int64)


# ---------------------------------------------------------------------------
# gradient boosting


@dataclass(frozen=True)
class GbmParams:
    n_estimators: int = 100
    learning_rate: float = 0.1
    base_tree_depth: int = 3
    min_samples_split: int = 2
    random_state: int = 0

    def __post_init__(self):
        if int(self.n_estimators) < 0:
            raise ValueError(f"n_estimators must be >= 0, got {self.n_estimators}")
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in [0, 1], got {self.learning_rate}")
        TreeParams(self.base_tree_depth, self.min_samples_split, self.random_state)


@dataclass(frozen=True)
class TrainedGbm:
    initial_logit: float
    stages: tuple
    learning_rate: float
    n_features: int
    # mean training log-loss after 0, 1, ..., len(stages) stages
    train_loss: tuple = ()

    def predict_proba(self, X) -> np.ndarray:
        return predict_gbm_proba(self, X)

    def predict(self, X) -> np.ndarray:
        return predict_gbm(self, X)


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_loss(y, logits) -> float:
    """Mean binary cross-entropy written in terms of logits."""
    y = np.asarray(y, dtype=float)
    f = np.asarray(logits, dtype=float)
    return float(np.mean(np.logaddexp(0.0, f) - y * f))


def fit_gbm(X, labels, params: GbmParams = GbmParams()) -> TrainedGbm:
    """Stagewise boosting of depth-limited regression trees on the residual
    ``y - sigmoid(F)``, starting from the log-odds of the class prior.

    With leaf values equal to mean residuals and ``learning_rate <= 1`` each
    stage cannot increase the training log-loss.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot fit boosting on an empty training set")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("boosting labels must be 0/1")
    prior = y.mean()
    if prior in (0.0, 1.0):
        raise ValueError("boosting needs both classes in the training labels")
    f0 = math.log(prior / (1.0 - prior))
    F = np.full(X.shape[0], f0)
    losses = [log_loss(y, F)]
    stages = []
    n_stages = params.n_estimators
    if params.learning_rate == 0.0:
        warnings.warn("learning_rate=0: no stage can contribute; returning the prior model", RuntimeWarning, stacklevel=2)
        n_stages = 0
    tree_params = TreeParams(params.base_tree_depth, params.min_samples_split, params.random_state)
    for _ in range(n_stages):
        residual = y - sigmoid(F)
        tree = fit_tree(X, residual, tree_params, REGRESSION)
        F = F + params.learning_rate * predict_tree(tree, X)
        stages.append(tree)
        losses.append(log_loss(y, F))
    return TrainedGbm(f0, tuple(stages), params.learning_rate, X.shape[1], tuple(losses))


def gbm_decision_function(model: TrainedGbm, X, n_stages: int | None = None) -> np.ndarray:
    """Accumulated logit using the first ``n_stages`` stages (all if None)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} feature columns, got shape {X.shape}")
    stages = model.stages if n_stages is None else model.stages[:n_stages]
    F = np.full(X.shape[0], model.initial_logit)
    for tree in stages:
        F = F + model.learning_rate * predict_tree(tree, X)
    return F


def predict_gbm_proba(model: TrainedGbm, X, n_stages: int | None = None) -> np.ndarray:
    return sigmoid(gbm_decision_function(model, X, n_stages))


def predict_gbm(model: TrainedGbm, X, n_stages: int | None = None) -> np.ndarray:
    return (predict_gbm_proba(model, X, n_stages) > 0.5).astype(np.int64)
