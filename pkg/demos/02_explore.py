"""Correlation matrix plus a look at Light on weekdays versus the weekend."""

import argparse

import numpy as np
from _common import load_splits

from occupancy_ml.data import pearson_correlation


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir")
    args = parser.parse_args()

    splits, source = load_splits(args.data_dir)
    train = splits["train"]
    print(f"source: {source}\n")
    print(pearson_correlation(train).to_csv())

    days = train.timestamps.astype("datetime64[D]")
    weekday = (days.view("int64") - 4) % 7  # 0 = Monday
    weekend = weekday >= 5
    light = train.column("Light")
    for label, mask in (("weekday", ~weekend), ("weekend", weekend)):
        if mask.any():
            share = np.mean(light[mask] < 400)
            print(f"{label}: {mask.sum()} rows, median Light {np.median(light[mask]):.1f} lx, {share:.1%} below 400 lx")


if __name__ == "__main__":
    main()
