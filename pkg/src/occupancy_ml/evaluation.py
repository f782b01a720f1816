"""Accuracy metrics, the published benchmark configurations, verbatim
benchmark runs and validation-selected grid search."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import ensembles, simple_models
from .data import CO2_TEMPERATURE, LIGHT_CO2, FeatureSet, LabeledDataset, select_features
from .models import FAMILIES, canonical_family, fit_model, validate_params


def _pair(predicted, actual):
    p = np.asarray(predicted).ravel()
    a = np.asarray(actual).ravel()
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.size} predictions vs {a.size} labels")
    if p.size == 0:
        raise ValueError("accuracy of empty vectors is undefined")
    return p, a


def accuracy(predicted, actual) -> float:
    p, a = _pair(predicted, actual)
    return float(np.count_nonzero(p == a)) / p.size


class Confusion(NamedTuple):
    tp: int
    fp: int
    tn: int
    fn: int


def confusion_counts(predicted, actual) -> Confusion:
    p, a = _pair(predicted, actual)
    p1, a1 = p == 1, a == 1
    return Confusion(
        int(np.count_nonzero(p1 & a1)),
        int(np.count_nonzero(p1 & ~a1)),
        int(np.count_nonzero(~p1 & ~a1)),
        int(np.count_nonzero(~p1 & a1)),
    )


# ---------------------------------------------------------------------------
# published configurations


class PublishedConfig(NamedTuple):
    table: int
    family: str
    feature_set: FeatureSet
    hyperparameters: dict
    accuracy: tuple  # reported (train, validation, test)


PUBLISHED_CONFIGS: tuple = (
    PublishedConfig(1, "logistic_regression", LIGHT_CO2, {"random_state": 0, "C": 1, "penalty": "l2"}, (0.99, 0.98, 0.99)),
    PublishedConfig(1, "logistic_regression", CO2_TEMPERATURE, {"random_state": 0, "C": 1.5, "penalty": "l1"}, (0.90, 0.88, 0.81)),
    PublishedConfig(2, "naive_bayes", LIGHT_CO2, {}, (0.9835, 0.9925, 0.9882)),
    PublishedConfig(2, "naive_bayes", CO2_TEMPERATURE, {}, (0.9183, 0.9557, 0.7671)),
    PublishedConfig(3, "knn", LIGHT_CO2, {"n_neighbors": 33}, (0.99, 0.98, 0.97)),
    PublishedConfig(3, "knn", CO2_TEMPERATURE, {"n_neighbors": 49}, (0.93, 0.86, 0.79)),
    PublishedConfig(4, "decision_tree", LIGHT_CO2, {"min_samples_split": 2, "max_depth": 1, "random_state": 0}, (0.99, 0.98, 0.99)),
    PublishedConfig(4, "decision_tree", CO2_TEMPERATURE, {"min_samples_split": 2, "max_depth": 1, "random_state": 0}, (0.93, 0.87, 0.78)),
    PublishedConfig(
        5,
        "random_forest",
        LIGHT_CO2,
        {"min_samples_split": 2, "max_depth": 2, "n_estimators": 18, "random_state": 0},
        (0.99, 0.98, 0.99),
    ),
    PublishedConfig(
        5,
        "random_forest",
        CO2_TEMPERATURE,
        {"min_samples_split": 2, "max_depth": 1, "n_estimators": 15, "random_state": 0},
        (0.92, 0.85, 0.86),
    ),
    PublishedConfig(6, "gbm", LIGHT_CO2, {"random_state": 0, "n_estimators": 112, "learning_rate": 0.08}, (0.99, 0.94, 0.99)),
    PublishedConfig(6, "gbm", CO2_TEMPERATURE, {"random_state": 0, "n_estimators": 111, "learning_rate": 0.01}, (0.93, 0.69, 0.77)),
    PublishedConfig(7, "svm", LIGHT_CO2, {"random_state": 0, "kernel": "linear"}, (0.99, 0.98, 0.99)),
    PublishedConfig(7, "svm", CO2_TEMPERATURE, {"random_state": 0, "kernel": "linear"}, (0.92, 0.86, 0.84)),
)

# consolidated Light-CO2 table, columns in FAMILIES order
TABLE8 = {
    "train": (0.99, 0.98, 0.99, 0.99, 0.99, 0.99, 0.99),
    "validation": (0.98, 0.99, 0.98, 0.98, 0.98, 0.94, 0.98),
    "test": (0.99, 0.98, 0.97, 0.99, 0.99, 0.99, 0.99),
}

TOLERANCE = {LIGHT_CO2: 0.03, CO2_TEMPERATURE: 0.05}


def tolerance_for(fs: FeatureSet) -> float:
    return TOLERANCE.get(fs, 0.05)


def table8_reference(family: str) -> tuple:
    i = FAMILIES.index(canonical_family(family))
    return tuple(TABLE8[k][i] for k in ("train", "validation", "test"))


# ---------------------------------------------------------------------------
# benchmark


@dataclass(frozen=True)
class EvaluationReport:
    family: str
    feature_set: FeatureSet
    hyperparameters: dict
    accuracy_train: float | None = None
    accuracy_validation: float | None = None
    accuracy_test: float | None = None
    reported: tuple | None = None  # published (train, validation, test)
    table: int | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def accuracies(self) -> tuple:
        return (self.accuracy_train, self.accuracy_validation, self.accuracy_test)

    def deviations(self, reported: tuple | None = None) -> tuple | None:
        """``|reported - reproduced|`` per split, or None without a reference."""
        ref = reported if reported is not None else self.reported
        if ref is None or self.failed:
            return None
        return tuple(abs(r - a) for r, a in zip(ref, self.accuracies))

    def within_tolerance(self, tol: float | None = None, reported: tuple | None = None) -> bool:
        tol = tolerance_for(self.feature_set) if tol is None else tol
        dev = self.deviations(reported)
        return dev is not None and all(d <= tol + 1e-12 for d in dev)


def with_seed(params: dict, seed: int) -> dict:
    """Replace ``random_state`` (where the family takes one) with ``seed``."""
    out = dict(params)
    if "random_state" in out:
        out["random_state"] = int(seed)
    return out


def evaluate(
    family: str,
    feature_set: FeatureSet,
    hyperparameters: dict,
    train: LabeledDataset,
    validation: LabeledDataset,
    test: LabeledDataset,
    standardize: bool = True,
    reported: tuple | None = None,
    table: int | None = None,
) -> EvaluationReport:
    """Fit on ``train`` only, then score train, validation and test once each."""
    base = dict(family=family, feature_set=feature_set, hyperparameters=dict(hyperparameters), reported=reported, table=table)
    try:
        X, y = select_features(train, feature_set)
        model = fit_model(family, X, y, hyperparameters, standardize, feature_set.names)
        if getattr(model.model, "converged", True) is False:
            raise RuntimeError("solver did not converge")
        acc_train = model.score(X, y)
        Xv, yv = select_features(validation, feature_set)
        acc_valid = model.score(Xv, yv)
        Xt, yt = select_features(test, feature_set)
        acc_test = model.score(Xt, yt)
    except Exception as exc:  # noqa: BLE001 - recorded per cell, never fatal
        return EvaluationReport(**base, error=f"{type(exc).__name__}: {exc}")
    return EvaluationReport(**base, accuracy_train=acc_train, accuracy_validation=acc_valid, accuracy_test=acc_test)


def run_benchmark(
    train: LabeledDataset,
    validation: LabeledDataset,
    test: LabeledDataset,
    configs: Sequence = PUBLISHED_CONFIGS,
    standardize: bool = True,
    seed: int = 0,
    n_jobs: int = 1,
) -> list:
    """One report per configuration, in configuration order.

    Every feature set is validated before any model is trained, so a request
    containing the Date column fails up front.
    """
    configs = [c._replace(feature_set=_feature_set(c.feature_set), family=canonical_family(c.family)) for c in configs]

    def run(c: PublishedConfig) -> EvaluationReport:
        return evaluate(
            c.family, c.feature_set, with_seed(c.hyperparameters, seed), train, validation, test, standardize, c.accuracy, c.table
        )

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(run, configs))
    return [run(c) for c in configs]


def _feature_set(fs) -> FeatureSet:
    if isinstance(fs, FeatureSet):
        return fs
    if isinstance(fs, str):
        return FeatureSet.parse(fs)
    return FeatureSet(tuple(fs))


def table8_reports(reports: Sequence[EvaluationReport]) -> list:
    """The Light-CO2 reports in consolidated-table column order, each paired with its reference values."""
    by_family = {r.family: r for r in reports if r.feature_set == LIGHT_CO2}
    return [(f, by_family.get(f), table8_reference(f)) for f in FAMILIES]


# ---------------------------------------------------------------------------
# grid search


@dataclass(frozen=True)
class GridSpec:
    """Ordered hyperparameter axes; cells enumerate lexicographically with
    the first axis varying slowest. ``fixed`` is merged into every cell."""

    family: str
    axes: tuple
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))
        axes = tuple(self.axes.items()) if isinstance(self.axes, dict) else tuple(self.axes)
        axes = tuple((str(name), tuple(values)) for name, values in axes)
        if not axes:
            raise ValueError("grid has no axes")
        for name, values in axes:
            if not values:
                raise ValueError(f"grid axis {name!r} is empty")
        object.__setattr__(self, "axes", axes)
        for cell in self.cells():
            validate_params(self.family, cell)

    @property
    def size(self) -> int:
        n = 1
        for _, values in self.axes:
            n *= len(values)
        return n

    def cells(self) -> list:
        names = [n for n, _ in self.axes]
        return [{**self.fixed, **dict(zip(names, combo))} for combo in itertools.product(*(v for _, v in self.axes))]


def default_grid(family: str, random_state: int = 0) -> GridSpec:
    family = canonical_family(family)
    seed = {"random_state": random_state}
    c_values = (0.01, 0.1, 0.5, 1, 1.5, 2, 10)
    depths = (1, 2, 3, 5)
    if family == "logistic_regression":
        return GridSpec(family, {"C": c_values, "penalty": ("l1", "l2")}, seed)
    if family == "svm":
        return GridSpec(family, {"C": c_values, "kernel": ("linear",)}, seed)
    if family == "knn":
        return GridSpec(family, {"n_neighbors": tuple(range(1, 100, 2))})
    if family == "decision_tree":
        return GridSpec(family, {"max_depth": depths, "min_samples_split": (2,)}, seed)
    if family == "random_forest":
        return GridSpec(family, {"max_depth": depths, "n_estimators": tuple(range(5, 31))}, {**seed, "min_samples_split": 2})
    if family == "gbm":
        rates = tuple(round(0.01 * i, 2) for i in range(1, 11))
        return GridSpec(family, {"learning_rate": rates, "n_estimators": tuple(range(10, 121))}, seed)
    return GridSpec(family, {"variance_floor": (1e-9,)})


class GridCell(NamedTuple):
    index: int
    params: dict
    train_accuracy: float | None
    validation_accuracy: float | None
    status: str  # "ok" | "failed"
    reason: str = ""


@dataclass(frozen=True)
class GridResult:
    family: str
    feature_set: FeatureSet
    best_params: dict | None
    best_validation_accuracy: float | None
    trace: tuple

    @property
    def best_cell(self) -> GridCell | None:
        ok = [c for c in self.trace if c.status == "ok"]
        if not ok:
            return None
        best = max(c.validation_accuracy for c in ok)
        return next(c for c in ok if c.validation_accuracy == best)


def _ensemble_prefixes(family, group, X, y, Xv, yv):
    """Score every n_estimators in ``group`` from one fit with the largest.

    Valid because tree/stage ``i`` depends only on (data, params, seed, i):
    a model with ``m`` estimators is exactly the first ``m`` of a larger one.
    """
    top = max(group, key=lambda item: item[1]["n_estimators"])[1]
    model = fit_model(family, X, y, top).model
    out = []
    for index, params in group:
        m = params["n_estimators"]
        if family == "random_forest":
            sub = ensembles.TrainedForest(model.trees[:m], model.params, model.n_features)
            pt, pv = ensembles.predict_forest(sub, X), ensembles.predict_forest(sub, Xv)
        else:
            pt, pv = ensembles.predict_gbm(model, X, m), ensembles.predict_gbm(model, Xv, m)
        out.append(GridCell(index, params, accuracy(pt, y), accuracy(pv, yv), "ok"))
    return out


def _knn_prefixes(group, X, y, Xv, yv, standardize):
    """Score every k in ``group`` from one neighbour search with the largest k;
    the neighbours for a smaller k are a prefix of that ordering."""
    ks = [params["n_neighbors"] for _, params in group]
    model = fit_model("knn", X, y, {"n_neighbors": max(ks)}, standardize).model
    train_pred = simple_models.knn_predict_many(model, X, ks)
    valid_pred = simple_models.knn_predict_many(model, Xv, ks)
    return [
        GridCell(index, params, accuracy(train_pred[k], y), accuracy(valid_pred[k], yv), "ok")
        for (index, params), k in zip(group, ks)
    ]


def grid_search(
    grid: GridSpec,
    feature_set,
    train: LabeledDataset,
    validation: LabeledDataset,
    standardize: bool = True,
    n_jobs: int = 1,
) -> GridResult:
    """Train every cell on ``train`` and score it on ``validation``.

    The best cell has the highest validation accuracy; ties go to the earlier
    cell. Cells that raise or fail to converge are kept in the trace as
    ``failed`` and never selected. The test split is never seen.
    """
    fs = _feature_set(feature_set)
    family = grid.family
    X, y = select_features(train, fs)
    Xv, yv = select_features(validation, fs)
    cells = list(enumerate(grid.cells()))

    def one(item) -> GridCell:
        index, params = item
        try:
            model = fit_model(family, X, y, params, standardize, fs.names)
            if getattr(model.model, "converged", True) is False:
                return GridCell(index, params, model.score(X, y), model.score(Xv, yv), "failed", "solver did not converge")
            return GridCell(index, params, model.score(X, y), model.score(Xv, yv), "ok")
        except Exception as exc:  # noqa: BLE001
            return GridCell(index, params, None, None, "failed", f"{type(exc).__name__}: {exc}")

    prefix_axis = {"random_forest": "n_estimators", "gbm": "n_estimators", "knn": "n_neighbors"}.get(family)
    if prefix_axis and any(name == prefix_axis for name, _ in grid.axes):
        groups: dict = {}
        for index, params in cells:
            key = tuple(sorted((k, repr(v)) for k, v in params.items() if k != prefix_axis))
            groups.setdefault(key, []).append((index, params))

        def run_group(group):
            try:
                if family == "knn":
                    return _knn_prefixes(group, X, y, Xv, yv, standardize)
                return _ensemble_prefixes(family, group, X, y, Xv, yv)
            except Exception:  # noqa: BLE001 - fall back to per-cell fits for precise failures
                return [one(item) for item in group]

        units = [(run_group, g) for g in groups.values()]
    else:
        units = [(lambda item: [one(item)], item) for item in cells]

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(lambda u: u[0](u[1]), units))
    else:
        results = [fn(arg) for fn, arg in units]
    trace = tuple(sorted((c for r in results for c in r), key=lambda c: c.index))

    ok = [c for c in trace if c.status == "ok"]
    if not ok:
        return GridResult(family, fs, None, None, trace)
    best = ok[0]
    for c in ok[1:]:
        if c.validation_accuracy > best.validation_accuracy:
            best = c
    return GridResult(family, fs, dict(best.params), best.validation_accuracy, trace)
