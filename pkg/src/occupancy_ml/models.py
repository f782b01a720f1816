"""Uniform fit/predict surface over the seven classifier families.

Hyperparameters are plain dicts using the vocabulary of the published
tables (``C``, ``penalty``, ``max_depth``, ``min_samples_split``,
``n_estimators``, ``learning_rate``, ``n_neighbors``, ``kernel``,
``random_state``) plus a few extras with documented defaults
(``base_tree_depth``, ``max_features_rule``, ``variance_floor``, ``epochs``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import ensembles, linear_models, simple_models, trees

FAMILIES = (
    "logistic_regression",
    "naive_bayes",
    "knn",
    "decision_tree",
    "random_forest",
    "gbm",
    "svm",
)

SHORT_NAMES = {
    "logistic_regression": "LR",
    "naive_bayes": "NB",
    "knn": "K-NN",
    "decision_tree": "DT",
    "random_forest": "RF",
    "gbm": "GBM",
    "svm": "K-SVM",
}

TITLES = {
    "logistic_regression": "Logistic Regression",
    "naive_bayes": "Naive Bayes",
    "knn": "K-Nearest Neighbors",
    "decision_tree": "Decision Tree",
    "random_forest": "Random Forest",
    "gbm": "Gradient Boosting Machine",
    "svm": "Kernelized SVM",
}

_ALIASES = {
    "lr": "logistic_regression",
    "logistic": "logistic_regression",
    "logreg": "logistic_regression",
    "nb": "naive_bayes",
    "gnb": "naive_bayes",
    "kn": "knn",
    "k-nn": "knn",
    "knearestneighbors": "knn",
    "dt": "decision_tree",
    "tree": "decision_tree",
    "rf": "random_forest",
    "forest": "random_forest",
    "gb": "gbm",
    "gradient_boosting": "gbm",
    "k-svm": "svm",
    "ksvm": "svm",
    "linear_svm": "svm",
}


def canonical_family(name: str) -> str:
    key = name.strip().lower().replace(" ", "_")
    key = _ALIASES.get(key, _ALIASES.get(key.replace("_", ""), key))
    if key not in FAMILIES:
        raise ValueError(f"unknown model family {name!r}; expected one of {FAMILIES}")
    return key


def _take(params: dict, allowed: dict) -> dict:
    unknown = set(params) - set(allowed)
    if unknown:
        raise ValueError(f"unexpected hyperparameter(s) {sorted(unknown)}; allowed: {sorted(allowed)}")
    return {allowed[k]: v for k, v in params.items()}


def _lr(params: dict) -> linear_models.LogisticParams:
    return linear_models.LogisticParams(
        **_take(
            params,
            {
                "C": "C",
                "penalty": "penalty",
                "random_state": "random_state",
                "tolerance": "tolerance",
                "max_iterations": "max_iterations",
                "max_iter": "max_iterations",
            },
        )
    )


def _svm(params: dict) -> linear_models.SvmParams:
    return linear_models.SvmParams(
        **_take(params, {"kernel": "kernel", "C": "C", "random_state": "random_state", "epochs": "epochs", "tolerance": "tolerance"})
    )


def _tree(params: dict) -> trees.TreeParams:
    return trees.TreeParams(
        **_take(params, {"max_depth": "max_depth", "min_samples_split": "min_samples_split", "random_state": "random_state"})
    )


def _rf(params: dict) -> ensembles.ForestParams:
    return ensembles.ForestParams(
        **_take(
            params,
            {
                "n_estimators": "n_estimators",
                "max_depth": "max_depth",
                "min_samples_split": "min_samples_split",
                "random_state": "random_state",
                "max_features_rule": "max_features_rule",
                "bootstrap": "bootstrap",
            },
        )
    )


def _gbm(params: dict) -> ensembles.GbmParams:
    return ensembles.GbmParams(
        **_take(
            params,
            {
                "n_estimators": "n_estimators",
                "learning_rate": "learning_rate",
                "base_tree_depth": "base_tree_depth",
                "max_depth": "base_tree_depth",
                "min_samples_split": "min_samples_split",
                "random_state": "random_state",
            },
        )
    )


def _knn(params: dict) -> simple_models.KnnParams:
    # random_state is accepted for uniformity; KNN consumes no randomness
    p = _take(params, {"n_neighbors": "n_neighbors", "random_state": "random_state"})
    return simple_models.KnnParams(p.get("n_neighbors", 5))


def _nb_floor(params: dict) -> float:
    _take(params, {"variance_floor": "variance_floor", "random_state": "random_state"})
    return float(params.get("variance_floor", simple_models.DEFAULT_VARIANCE_FLOOR))


def validate_params(family: str, params: dict) -> None:
    """Raise ValueError/NotImplementedError if ``params`` are invalid for ``family``."""
    family = canonical_family(family)
    if family == "logistic_regression":
        _lr(params)
    elif family == "svm":
        _svm(params)
    elif family == "decision_tree":
        _tree(params)
    elif family == "random_forest":
        _rf(params)
    elif family == "gbm":
        _gbm(params)
    elif family == "knn":
        _knn(params)
    else:
        _nb_floor(params)


@dataclass(frozen=True)
class TrainedModel:
    """A fitted classifier of any family with a common predict/score contract."""

    family: str
    params: dict
    model: Any
    feature_names: tuple | None = None
    _predict: Callable = field(default=None, repr=False, compare=False)

    def predict(self, X) -> np.ndarray:
        return np.asarray(self._predict(self.model, np.asarray(X, dtype=float)), dtype=np.int64)

    def score(self, X, y) -> float:
        from .evaluation import accuracy

        return accuracy(self.predict(X), y)


def fit_model(family: str, X, y, params: dict | None = None, standardize: bool = True, feature_names=None) -> TrainedModel:
    """Train one family on ``(X, y)``.

    ``standardize`` applies to the scale-sensitive families (logistic
    regression, SVM, KNN); naive Bayes and the tree models use raw features.
    """
    family = canonical_family(family)
    params = dict(params or {})
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if family == "logistic_regression":
        m = linear_models.fit_logistic(X, y, _lr(params), standardize, feature_names)
        pred = linear_models.predict_linear
    elif family == "svm":
        m = linear_models.fit_linear_svm(X, y, _svm(params), standardize, feature_names)
        pred = linear_models.predict_linear
    elif family == "decision_tree":
        m = trees.fit_tree(X, y, _tree(params))
        pred = trees.classify_tree
    elif family == "random_forest":
        m = ensembles.fit_random_forest(X, y, _rf(params))
        pred = ensembles.predict_forest
    elif family == "gbm":
        m = ensembles.fit_gbm(X, y, _gbm(params))
        pred = ensembles.predict_gbm
    elif family == "knn":
        m = simple_models.fit_knn(X, y, _knn(params), standardize)
        pred = simple_models.knn_predict
    else:
        m = simple_models.fit_gaussian_nb(X, y, _nb_floor(params))
        pred = simple_models.predict_nb
    return TrainedModel(family, params, m, tuple(feature_names) if feature_names is not None else None, pred)
