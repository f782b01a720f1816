"""Run the published-configuration benchmark and a KNN sweep through the CLI."""

import argparse
import tempfile
from pathlib import Path

from _common import split_files

from occupancy_ml.cli import main as cli


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir")
    parser.add_argument("--out", default="demo_results")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as scratch:
        files, source = split_files(args.data_dir, Path(scratch))
        print(f"source: {source}\n")
        common = ["--train", str(files["train"]), "--valid", str(files["validation"]), "--test", str(files["test"])]
        code = cli(["benchmark", *common, "--out", args.out, "--jobs", "4"])
        print(f"benchmark exit code {code}\n")
        code = cli(["sweep", *common, "--out", args.out, "--model", "knn", "--features", "Light,CO2"])
        print(f"sweep exit code {code}; tables in {args.out}/")


if __name__ == "__main__":
    main()
