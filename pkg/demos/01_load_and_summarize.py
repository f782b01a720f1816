"""Load the three splits and print per-column summary statistics."""

import argparse

from _common import load_splits

from occupancy_ml.data import summarize


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", help="directory holding datatraining.txt, datatest.txt, datatest2.txt")
    args = parser.parse_args()

    splits, source = load_splits(args.data_dir)
    print(f"source: {source}\n")
    for name, ds in splits.items():
        occupied = ds.labels.mean()
        print(f"== {name}: {len(ds)} rows, {occupied:.1%} occupied, {ds.timestamps[0]} .. {ds.timestamps[-1]}")
        print(summarize(ds).to_text())
        print()


if __name__ == "__main__":
    main()
