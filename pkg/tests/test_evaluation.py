import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import occupancy_ml.evaluation as evaluation
from occupancy_ml.data import CO2_TEMPERATURE, LIGHT_CO2, DataError, FeatureSet, LabeledDataset, select_features
from occupancy_ml.evaluation import (
    PUBLISHED_CONFIGS,
    Confusion,
    EvaluationReport,
    GridSpec,
    PublishedConfig,
    accuracy,
    confusion_counts,
    default_grid,
    evaluate,
    grid_search,
    run_benchmark,
    table8_reference,
    table8_reports,
    tolerance_for,
)
from occupancy_ml.models import FAMILIES, fit_model


def with_labels(ds: LabeledDataset, labels) -> LabeledDataset:
    return LabeledDataset(ds.split_name, ds.timestamps, dict(ds.columns), np.asarray(labels), ds.source)


binary_pairs = st.integers(1, 60).flatmap(
    lambda n: st.tuples(arrays(np.int64, n, elements=st.integers(0, 1)), arrays(np.int64, n, elements=st.integers(0, 1)))
)


# ---------------------------------------------------------------------------
# metrics


def test_accuracy_examples():
    assert accuracy([1, 0, 1, 1], [1, 1, 1, 0]) == 0.5
    assert accuracy([0, 0, 0], [0, 0, 0]) == 1.0
    assert accuracy([1, 1], [0, 0]) == 0.0


def test_accuracy_errors():
    with pytest.raises(ValueError, match="mismatch"):
        accuracy([0, 1], [0])
    with pytest.raises(ValueError, match="empty"):
        accuracy([], [])


@given(binary_pairs)
def test_accuracy_symmetric_and_bounded(pair):
    p, a = pair
    assert accuracy(p, a) == accuracy(a, p)
    assert 0.0 <= accuracy(p, a) <= 1.0
    assert accuracy(p, p) == 1.0


def test_confusion_tally():
    assert confusion_counts([1, 1, 0, 0, 1], [1, 0, 0, 1, 1]) == Confusion(tp=2, fp=1, tn=1, fn=1)


@given(binary_pairs)
def test_confusion_is_consistent_with_accuracy(pair):
    p, a = pair
    c = confusion_counts(p, a)
    assert c.tp + c.fp + c.tn + c.fn == p.size
    assert accuracy(p, a) == pytest.approx((c.tp + c.tn) / p.size, abs=1e-15)


# ---------------------------------------------------------------------------
# published configurations and reports


def test_published_configs_cover_every_family_twice():
    assert len(PUBLISHED_CONFIGS) == 14
    for family in FAMILIES:
        sets = [c.feature_set for c in PUBLISHED_CONFIGS if c.family == family]
        assert sets == [LIGHT_CO2, CO2_TEMPERATURE]


def test_consolidated_reference_matches_per_family_rows():
    # the consolidated Light-CO2 table repeats the per-family rows except for NB and K-NN
    for c in PUBLISHED_CONFIGS:
        if c.feature_set == LIGHT_CO2 and c.family not in ("naive_bayes", "knn"):
            assert table8_reference(c.family) == c.accuracy


def test_tolerances():
    assert tolerance_for(LIGHT_CO2) == 0.03
    assert tolerance_for(CO2_TEMPERATURE) == 0.05


def test_report_tolerance_logic():
    r = EvaluationReport("knn", LIGHT_CO2, {}, 0.99, 0.96, 1.0, reported=(0.99, 0.98, 0.97))
    assert r.deviations() == pytest.approx((0.0, 0.02, 0.03))
    assert r.within_tolerance()
    assert not r.within_tolerance(0.02)
    failed = EvaluationReport("knn", LIGHT_CO2, {}, reported=(0.9, 0.9, 0.9), error="ValueError: boom")
    assert failed.failed and not failed.within_tolerance()


def test_evaluate_scores_each_split(synthetic_splits):
    s = synthetic_splits
    r = evaluate("decision_tree", LIGHT_CO2, {"max_depth": 2}, s["train"], s["validation"], s["test"])
    model = fit_model("decision_tree", *select_features(s["train"], LIGHT_CO2), {"max_depth": 2})
    assert r.error is None
    assert r.accuracies == tuple(model.score(*select_features(s[k], LIGHT_CO2)) for k in ("train", "validation", "test"))


def test_evaluate_records_failures(synthetic_splits):
    s = synthetic_splits
    ones = with_labels(s["train"], np.ones(len(s["train"]), dtype=int))
    r = evaluate("gbm", LIGHT_CO2, {}, ones, s["validation"], s["test"])
    assert r.failed and "both classes" in r.error
    assert r.accuracies == (None, None, None)


def test_benchmark_gives_fourteen_ordered_reports(synthetic_splits):
    s = synthetic_splits
    reports = run_benchmark(s["train"], s["validation"], s["test"])
    assert [(r.family, r.feature_set) for r in reports] == [(c.family, c.feature_set) for c in PUBLISHED_CONFIGS]
    assert all(r.error is None for r in reports)
    assert all(0.5 <= a <= 1.0 for r in reports for a in r.accuracies)
    pairs = table8_reports(reports)
    assert [f for f, _, _ in pairs] == list(FAMILIES)
    assert all(r is not None and r.feature_set == LIGHT_CO2 for _, r, _ in pairs)


def test_benchmark_threads_do_not_change_results(synthetic_splits):
    s = synthetic_splits
    configs = PUBLISHED_CONFIGS[::3]
    assert run_benchmark(s["train"], s["validation"], s["test"], configs) == run_benchmark(
        s["train"], s["validation"], s["test"], configs, n_jobs=4
    )


def test_benchmark_seed_reaches_seeded_families(synthetic_splits):
    s = synthetic_splits
    rf = [c for c in PUBLISHED_CONFIGS if c.family == "random_forest"]
    a = run_benchmark(s["train"], s["validation"], s["test"], rf, seed=0)
    b = run_benchmark(s["train"], s["validation"], s["test"], rf, seed=0)
    assert a == b
    assert all(r.hyperparameters["random_state"] == 3 for r in run_benchmark(s["train"], s["validation"], s["test"], rf, seed=3))


def test_date_feature_rejected_before_any_fit(synthetic_splits, monkeypatch):
    s = synthetic_splits
    calls = []
    monkeypatch.setattr(evaluation, "fit_model", lambda *a, **k: calls.append(a))
    configs = [PUBLISHED_CONFIGS[0], PublishedConfig(1, "logistic_regression", ("Light", "Date"), {}, (1, 1, 1))]
    with pytest.raises(DataError, match="Date"):
        run_benchmark(s["train"], s["validation"], s["test"], configs)
    assert calls == []


# ---------------------------------------------------------------------------
# grid search


def test_grid_spec_validation():
    with pytest.raises(ValueError, match="empty"):
        GridSpec("knn", {"n_neighbors": ()})
    with pytest.raises(ValueError, match="no axes"):
        GridSpec("knn", {})
    with pytest.raises(ValueError):
        GridSpec("knn", {"n_neighbors": (0,)})
    with pytest.raises(ValueError):
        GridSpec("gbm", {"learning_rate": (2.0,)})


def test_grid_cells_enumerate_first_axis_slowest():
    g = GridSpec("rf", {"max_depth": (1, 2), "n_estimators": (5, 6, 7)}, {"random_state": 0})
    assert g.size == 6
    assert [(c["max_depth"], c["n_estimators"]) for c in g.cells()] == [(1, 5), (1, 6), (1, 7), (2, 5), (2, 6), (2, 7)]
    assert all(c["random_state"] == 0 for c in g.cells())


def test_default_grid_sizes():
    sizes = {f: default_grid(f).size for f in FAMILIES}
    assert sizes == {
        "logistic_regression": 14,
        "naive_bayes": 1,
        "knn": 50,
        "decision_tree": 4,
        "random_forest": 104,
        "gbm": 1110,
        "svm": 7,
    }


def test_single_cell_grid(synthetic_splits):
    s = synthetic_splits
    result = grid_search(GridSpec("dt", {"max_depth": (2,)}), LIGHT_CO2, s["train"], s["validation"])
    assert len(result.trace) == 1
    model = fit_model("decision_tree", *select_features(s["train"], LIGHT_CO2), {"max_depth": 2})
    assert result.best_validation_accuracy == model.score(*select_features(s["validation"], LIGHT_CO2))
    assert result.best_params == {"max_depth": 2}


def test_validation_tie_goes_to_the_earlier_cell(synthetic_splits):
    s = synthetic_splits
    # variance floors this small leave every prediction unchanged
    result = grid_search(GridSpec("nb", {"variance_floor": (1e-9, 1e-12, 1e-15)}), LIGHT_CO2, s["train"], s["validation"])
    accs = {c.validation_accuracy for c in result.trace}
    assert len(accs) == 1
    assert result.best_params == {"variance_floor": 1e-9}
    assert result.best_cell.index == 0


def test_selection_uses_validation_accuracy(synthetic_splits):
    s = synthetic_splits
    result = grid_search(GridSpec("knn", {"n_neighbors": (1, 15, 61)}), CO2_TEMPERATURE, s["train"], s["validation"])
    best = max(c.validation_accuracy for c in result.trace)
    assert result.best_validation_accuracy == best
    assert result.best_params == next(c.params for c in result.trace if c.validation_accuracy == best)


def test_failed_cells_are_recorded_and_skipped(synthetic_splits):
    s = synthetic_splits
    too_big = len(s["train"]) + 1
    result = grid_search(GridSpec("knn", {"n_neighbors": (3, too_big)}), LIGHT_CO2, s["train"], s["validation"])
    ok, bad = result.trace
    assert ok.status == "ok" and bad.status == "failed"
    assert "exceeds" in bad.reason and bad.validation_accuracy is None
    assert result.best_params == {"n_neighbors": 3}


def test_all_cells_failing_gives_no_best(synthetic_splits):
    s = synthetic_splits
    ones = with_labels(s["train"], np.ones(len(s["train"]), dtype=int))
    result = grid_search(GridSpec("lr", {"C": (0.1, 1.0)}), LIGHT_CO2, ones, s["validation"])
    assert result.best_params is None and result.best_cell is None
    assert [c.status for c in result.trace] == ["failed", "failed"]


@given(
    st.lists(st.sampled_from([1, 2, 3]), min_size=1, max_size=3, unique=True),
    st.lists(st.integers(5, 9), min_size=1, max_size=3, unique=True),
)
@settings(max_examples=10)
def test_trace_length_is_the_axis_product(depths, sizes):
    from occupancy_ml.synthetic import make_splits

    s = make_splits(1, (1500, 600, 10))
    g = GridSpec("rf", {"max_depth": depths, "n_estimators": sizes}, {"random_state": 0})
    result = grid_search(g, LIGHT_CO2, s["train"], s["validation"])
    assert len(result.trace) == len(depths) * len(sizes)
    assert [c.index for c in result.trace] == list(range(g.size))


@pytest.mark.parametrize(
    "grid",
    [
        GridSpec("rf", {"max_depth": (1, 3), "n_estimators": (5, 9, 12)}, {"random_state": 4}),
        GridSpec("gbm", {"learning_rate": (0.05, 0.3), "n_estimators": (10, 17, 25)}, {"random_state": 0}),
        GridSpec("knn", {"n_neighbors": (1, 2, 7, 30, 99)}),
    ],
    ids=["rf", "gbm", "knn"],
)
def test_prefix_fast_path_matches_per_cell_fits(grid, synthetic_splits):
    s = synthetic_splits
    train, valid = s["train"], s["validation"]
    result = grid_search(grid, CO2_TEMPERATURE, train, valid)
    X, y = select_features(train, CO2_TEMPERATURE)
    Xv, yv = select_features(valid, CO2_TEMPERATURE)
    for cell, params in zip(result.trace, grid.cells()):
        model = fit_model(grid.family, X, y, params)
        assert cell.params == params
        assert (cell.train_accuracy, cell.validation_accuracy) == (model.score(X, y), model.score(Xv, yv))


def test_grid_search_is_deterministic_and_thread_safe(synthetic_splits):
    s = synthetic_splits
    g = GridSpec("lr", {"C": (0.1, 1.0), "penalty": ("l1", "l2")}, {"random_state": 0})
    a = grid_search(g, LIGHT_CO2, s["train"], s["validation"])
    b = grid_search(g, LIGHT_CO2, s["train"], s["validation"], n_jobs=3)
    assert a == b


def test_grid_rejects_date_feature(synthetic_splits):
    s = synthetic_splits
    with pytest.raises(DataError):
        grid_search(default_grid("dt"), FeatureSet.parse("Light,Date"), s["train"], s["validation"])
