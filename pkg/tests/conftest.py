import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from occupancy_ml.data import load_occupancy_csv
from occupancy_ml.synthetic import make_splits, write_splits

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    print_blob=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")

REPO = Path(__file__).resolve().parents[1]
DATA_FILES = {"train": "datatraining.txt", "validation": "datatest.txt", "test": "datatest2.txt"}


def data_dir() -> Path:
    return Path(os.environ.get("OCCUPANCY_DATA_DIR", REPO / "data"))


@pytest.fixture(scope="session")
def public_splits():
    """The public three-file dataset; a hard failure when it is absent."""
    root = data_dir()
    missing = [name for name in DATA_FILES.values() if not (root / name).is_file()]
    if missing:
        pytest.fail(
            f"occupancy dataset not found: {missing} missing under {root} "
            "(place the three UCI files there or set OCCUPANCY_DATA_DIR)",
            pytrace=False,
        )
    return {split: load_occupancy_csv(root / name, split) for split, name in DATA_FILES.items()}


@pytest.fixture(scope="session")
def synthetic_splits():
    return make_splits(0, (1500, 600, 1800))


@pytest.fixture(scope="session")
def synthetic_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthetic")
    return write_splits(root, 0, (1500, 600, 1800))


# ---------------------------------------------------------------------------
# acceptance report: one PASS/FAIL line per criterion

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(text): acceptance criterion checked by this test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    text = marker.args[0]
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    if call.when == "setup" and failed:
        _criteria[text] = "FAIL"
    elif call.when == "call":
        _criteria[text] = "FAIL" if failed else _criteria.get(text, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for text, status in _criteria.items():
        terminalreporter.write_line(f"{status}  {text}")
    passed = sum(s == "PASS" for s in _criteria.values())
    terminalreporter.write_line(f"{passed}/{len(_criteria)} criteria passed")
