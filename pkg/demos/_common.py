"""Shared demo helper: the public files when present, generated data otherwise."""

import os
from pathlib import Path

from occupancy_ml.data import load_occupancy_csv
from occupancy_ml.synthetic import make_splits, write_splits

FILES = {"train": "datatraining.txt", "validation": "datatest.txt", "test": "datatest2.txt"}


def data_dir(arg: str | None = None) -> Path:
    return Path(arg or os.environ.get("OCCUPANCY_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))


def load_splits(arg: str | None = None) -> tuple[dict, str]:
    root = data_dir(arg)
    if all((root / name).is_file() for name in FILES.values()):
        return {k: load_occupancy_csv(root / v, k) for k, v in FILES.items()}, f"public dataset in {root}"
    return make_splits(0), "generated stand-in data (public files not found)"


def split_files(arg: str | None, scratch: Path) -> tuple[dict, str]:
    root = data_dir(arg)
    if all((root / name).is_file() for name in FILES.values()):
        return {k: root / v for k, v in FILES.items()}, f"public dataset in {root}"
    return write_splits(scratch / "data", 0), "generated stand-in data (public files not found)"
