"""Logistic regression, linear SVM, naive Bayes and KNN on both feature sets."""

import argparse

from _common import load_splits

from occupancy_ml.data import CO2_TEMPERATURE, LIGHT_CO2, select_features
from occupancy_ml.models import fit_model

MODELS = [
    ("logistic_regression", {"C": 1, "penalty": "l2"}),
    ("logistic_regression", {"C": 1.5, "penalty": "l1"}),
    ("svm", {"kernel": "linear"}),
    ("naive_bayes", {}),
    ("knn", {"n_neighbors": 33}),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir")
    parser.add_argument("--no-standardize", action="store_true", help="fit LR/SVM/KNN on raw features")
    args = parser.parse_args()

    splits, source = load_splits(args.data_dir)
    print(f"source: {source}\n")
    for fs in (LIGHT_CO2, CO2_TEMPERATURE):
        X, y = select_features(splits["train"], fs)
        for family, params in MODELS:
            model = fit_model(family, X, y, params, standardize=not args.no_standardize, feature_names=fs.names)
            scores = [model.score(*select_features(splits[k], fs)) for k in ("train", "validation", "test")]
            print(f"{fs.label:16s} {family:20s} {str(params):32s} " + " ".join(f"{s:.4f}" for s in scores))


if __name__ == "__main__":
    main()
