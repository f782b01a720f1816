"""Fit a decision stump, a random forest and a boosted model on Light-CO2."""

import argparse

from _common import load_splits

from occupancy_ml.data import LIGHT_CO2, select_features
from occupancy_ml.ensembles import GbmParams, ForestParams, fit_gbm, fit_random_forest, predict_forest, predict_gbm
from occupancy_ml.evaluation import accuracy
from occupancy_ml.trees import TreeParams, classify_tree, export_text, fit_tree


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    splits, source = load_splits(args.data_dir)
    print(f"source: {source}\n")
    X, y = select_features(splits["train"], LIGHT_CO2)
    Xt, yt = select_features(splits["test"], LIGHT_CO2)

    stump = fit_tree(X, y, TreeParams(max_depth=1))
    print(export_text(stump, LIGHT_CO2.names))
    print(f"stump accuracy train {accuracy(classify_tree(stump, X), y):.4f} test {accuracy(classify_tree(stump, Xt), yt):.4f}\n")

    forest = fit_random_forest(X, y, ForestParams(18, max_depth=2, random_state=args.seed))
    print(f"forest ({len(forest.trees)} trees) test accuracy {accuracy(predict_forest(forest, Xt), yt):.4f}")

    gbm = fit_gbm(X, y, GbmParams(n_estimators=112, learning_rate=0.08, random_state=args.seed))
    print(f"boosting training log-loss {gbm.train_loss[0]:.4f} -> {gbm.train_loss[-1]:.4f}")
    print(f"boosting test accuracy {accuracy(predict_gbm(gbm, Xt), yt):.4f}")


if __name__ == "__main__":
    main()
