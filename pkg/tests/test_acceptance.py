"""Acceptance gate: one test per criterion, each tagged with ``criterion``.

The terminal summary prints one PASS/FAIL line per criterion. The first
five need the public three-file dataset (see ``conftest.public_splits``) and
fail when it is absent; the rest run on generated data.
"""

import warnings

import numpy as np
import pytest

import occupancy_ml.ensembles as ensembles
import occupancy_ml.linear_models as linear_models
import occupancy_ml.simple_models as simple_models
import occupancy_ml.trees as trees
from occupancy_ml.cli import EXIT_OK, main
from occupancy_ml.data import CO2_TEMPERATURE, LIGHT_CO2, LabeledDataset, select_features
from occupancy_ml.ensembles import GbmParams, fit_gbm, predict_gbm, predict_gbm_proba
from occupancy_ml.evaluation import (
    PUBLISHED_CONFIGS,
    default_grid,
    grid_search,
    run_benchmark,
    table8_reports,
    tolerance_for,
)
from occupancy_ml.models import SHORT_NAMES, TrainedModel

from . import test_ensembles, test_linear_models, test_simple_models, test_trees

criterion = pytest.mark.criterion


@pytest.fixture(scope="session")
def public_reports(public_splits):
    s = public_splits
    return run_benchmark(s["train"], s["validation"], s["test"], PUBLISHED_CONFIGS, n_jobs=4)


def describe(report, reference) -> str:
    if report.failed:
        return f"{SHORT_NAMES[report.family]} {report.feature_set.label}: {report.error}"
    got = "/".join(f"{a:.4f}" for a in report.accuracies)
    want = "/".join(f"{a:.4f}" for a in reference)
    return f"{SHORT_NAMES[report.family]} {report.feature_set.label}: got {got}, reported {want}"


# ---------------------------------------------------------------------------
# quantitative reproduction on the public dataset


@criterion("split sizes are exactly 8143 / 2665 / 9752 rows")
def test_split_sizes(public_splits):
    assert [len(public_splits[k]) for k in ("train", "validation", "test")] == [8143, 2665, 9752]


@criterion("training CO2 max is 2028 and test CO2 max is 2076")
def test_co2_maxima(public_splits):
    assert public_splits["train"].column("CO2").max() == 2028
    assert public_splits["test"].column("CO2").max() == 2076


@criterion("consolidated Light-CO2 row: all 7 x 3 accuracies within 0.03")
def test_light_co2_consolidated_row(public_reports):
    misses = [describe(r, ref) for _, r, ref in table8_reports(public_reports) if not r.within_tolerance(0.03, ref)]
    assert not misses, "\n".join(misses)


@criterion("CO2-Temperature rows of every family within 0.05")
def test_co2_temperature_rows(public_reports):
    rows = [r for r in public_reports if r.feature_set == CO2_TEMPERATURE]
    assert len(rows) == 7
    assert tolerance_for(CO2_TEMPERATURE) == 0.05
    misses = [describe(r, r.reported) for r in rows if not r.within_tolerance(0.05)]
    assert not misses, "\n".join(misses)


@criterion("KNN sweep over odd k in [1, 99] on Light-CO2 reaches validation accuracy >= 0.97")
def test_knn_sweep(public_splits):
    grid = default_grid("knn")
    assert [v for _, values in grid.axes for v in values] == list(range(1, 100, 2))
    result = grid_search(grid, LIGHT_CO2, public_splits["train"], public_splits["validation"])
    assert result.best_validation_accuracy >= 0.97, result.best_params


# ---------------------------------------------------------------------------
# property suites (no dataset needed); each delegates to the module-level
# hypothesis test, whose settings carry the required example count


@criterion("tree oracle: best_split equals exhaustive enumeration on 200 instances")
def test_tree_oracle():
    test_trees.test_best_split_matches_brute_force()


@criterion("logistic smooth-part gradients match central differences on 100 instances")
def test_gradient_checks():
    test_linear_models.test_l2_gradient_matches_finite_differences()
    test_linear_models.test_l1_smooth_part_gradient_matches_finite_differences()


@criterion("GBM staged training loss never increases; learning_rate -> 0 gives the prior predictor")
def test_gbm_monotone_and_degenerate():
    test_ensembles.test_gbm_training_loss_never_increases()
    rng = np.random.default_rng(0)
    X = rng.normal(size=(120, 2))
    y = (X[:, 0] + rng.normal(size=120) > 0.8).astype(int)
    prior = y.mean()
    for lr in (1e-6, 1e-9, 1e-12):
        model = fit_gbm(X, y, GbmParams(n_estimators=50, learning_rate=lr))
        assert np.allclose(predict_gbm_proba(model, X), prior, atol=60 * lr)
        assert np.all(predict_gbm(model, X) == int(prior > 0.5))
    with pytest.warns(RuntimeWarning):
        zero = fit_gbm(X, y, GbmParams(n_estimators=50, learning_rate=0.0))
    assert np.allclose(predict_gbm_proba(zero, X), prior, atol=1e-15)


@criterion("NB posteriors sum to 1 within 1e-12, finite at 1e6 standard deviations")
def test_nb_posterior_stability():
    test_simple_models.test_posteriors_sum_to_one_even_far_from_the_means()


@criterion("KNN equals brute force on every instance of at most 200 rows")
def test_knn_brute_force():
    test_simple_models.test_knn_matches_brute_force()
    test_simple_models.test_many_k_share_one_search()


@criterion("seed determinism: benchmark reruns write byte-identical files")
def test_seed_determinism(synthetic_files, tmp_path):
    args = ["benchmark", "--train", str(synthetic_files["train"]), "--valid", str(synthetic_files["validation"])]
    args += ["--test", str(synthetic_files["test"]), "--seed", "3"]
    runs = []
    for jobs in ("1", "1", "4"):
        out = tmp_path / "out"
        assert main([*args, "--out", str(out), "--jobs", jobs]) == EXIT_OK
        files = {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "config_benchmark.json"}
        runs.append(files)
        for p in out.iterdir():
            p.unlink()
    assert len(runs[0]) == 16
    assert runs[0] == runs[1] == runs[2]


@criterion("leakage guard: no training step touches validation or test rows")
def test_leakage_guard(synthetic_splits, monkeypatch):
    # shift held-out readings off the training value grid so every row is attributable to one split
    s = dict(synthetic_splits)
    for split, offset in (("validation", 3e-4), ("test", 7e-4)):
        ds = s[split]
        s[split] = LabeledDataset(split, ds.timestamps, {k: v + offset for k, v in ds.columns.items()}, ds.labels)
    seen = []  # (module.trainer, X) for every call

    def spy(module, name):
        original = getattr(module, name)
        label = f"{module.__name__.rsplit('.', 1)[-1]}.{name}"

        def wrapper(X, *args, **kwargs):
            seen.append((label, np.array(X, dtype=float)))
            return original(X, *args, **kwargs)

        monkeypatch.setattr(module, name, wrapper)

    for module, name in [
        (linear_models, "fit_logistic"),
        (linear_models, "fit_linear_svm"),
        (linear_models, "fit_standardizer"),
        (trees, "fit_tree"),
        (ensembles, "fit_tree"),
        (ensembles, "fit_random_forest"),
        (ensembles, "fit_gbm"),
        (simple_models, "fit_knn"),
        (simple_models, "fit_gaussian_nb"),
        (simple_models, "fit_standardizer"),
    ]:
        spy(module, name)

    predicted = []
    original_predict = TrainedModel.predict

    def predict_spy(self, X):
        predicted.append(np.array(X, dtype=float))
        return original_predict(self, X)

    monkeypatch.setattr(TrainedModel, "predict", predict_spy)

    def rows(ds, fs):
        return {tuple(r) for r in select_features(ds, fs)[0]}

    def check_training_rows():
        assert seen
        for name, X in seen:
            assert X.shape[1] == 2, name
            candidates = [f for f in (LIGHT_CO2, CO2_TEMPERATURE) if {tuple(r) for r in X} <= train_rows[f]]
            assert candidates, f"{name} trained on rows outside the training split"
            for f in candidates:
                assert not ({tuple(r) for r in X} & other_rows[f]), f"{name} saw held-out rows"

    train_mats = [select_features(s["train"], f)[0] for f in (LIGHT_CO2, CO2_TEMPERATURE)]
    train_rows = {f: rows(s["train"], f) for f in (LIGHT_CO2, CO2_TEMPERATURE)}
    other_rows = {f: rows(s["validation"], f) | rows(s["test"], f) for f in (LIGHT_CO2, CO2_TEMPERATURE)}
    # the check is only meaningful if held-out rows are distinguishable from training rows
    for f in (LIGHT_CO2, CO2_TEMPERATURE):
        assert not (train_rows[f] & other_rows[f])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        reports = run_benchmark(s["train"], s["validation"], s["test"])
    assert all(not r.failed for r in reports)
    check_training_rows()
    # ensembles.fit_tree is the per-tree/per-stage call; everything else is one call per report
    top_level = [X for name, X in seen if name != "ensembles.fit_tree" and not name.endswith("fit_standardizer")]
    assert len(top_level) == 14
    assert all(any(np.array_equal(X, m) for m in train_mats) for X in top_level)
    for f in (LIGHT_CO2, CO2_TEMPERATURE):
        Xt = select_features(s["test"], f)[0]
        n_test = sum(np.array_equal(X, Xt) for X in predicted)
        assert n_test == sum(r.feature_set == f for r in reports), "test matrix must be predicted once per report"

    seen.clear()
    predicted.clear()
    for family in ("knn", "gbm", "logistic_regression", "random_forest"):
        grid = default_grid(family)
        if family == "gbm":
            grid = type(grid)(family, {"learning_rate": (0.1,), "n_estimators": (10, 20)}, {"random_state": 0})
        if family == "random_forest":
            grid = type(grid)(family, {"max_depth": (2,), "n_estimators": (5, 6)}, {"random_state": 0})
        grid_search(grid, CO2_TEMPERATURE, s["train"], s["validation"])
    check_training_rows()
    Xt = select_features(s["test"], CO2_TEMPERATURE)[0]
    assert not any(np.array_equal(X, Xt) for X in predicted)
