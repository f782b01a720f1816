"""Loading, projecting, scaling and describing the occupancy sensor files.

The public files look like::

    "date","Temperature","Humidity","Light","CO2","HumidityRatio","Occupancy"
    "1","2015-02-04 17:51:00",23.18,27.272,426,721.25,0.00479298817650529,1

i.e. data rows carry a leading row id that the header does not name. Both
that layout and a header that names every column are accepted.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

SPLITS = ("train", "validation", "test")

# canonical predictor names, in file order
PREDICTORS = ("Temperature", "Humidity", "Light", "CO2", "HumidityRatio")
LABEL = "Occupancy"
TIMESTAMP = "Date"

TIMESTAMP_FORMATS = ("%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S")

_ALIASES = {
    "date": TIMESTAMP,
    "datetime": TIMESTAMP,
    "timestamp": TIMESTAMP,
    "time": TIMESTAMP,
    "temperature": "Temperature",
    "temp": "Temperature",
    "humidity": "Humidity",
    "relativehumidity": "Humidity",
    "light": "Light",
    "co2": "CO2",
    "humidityratio": "HumidityRatio",
    "occupancy": LABEL,
}
_ROW_ID_NAMES = {"", "id", "index", "row", "rowid"}


class DataError(ValueError):
    """Raised for unreadable, malformed or semantically invalid input."""


def canonical_name(name: str) -> str:
    """Map a source header spelling (``HumidityRatio``, ``humidity_ratio``,
    ``Humidity Ratio`` ...) to its canonical name. Unknown names are returned
    stripped but otherwise unchanged."""
    key = "".join(ch for ch in name.strip().lower() if ch.isalnum())
    return _ALIASES.get(key, name.strip())


class SensorRow(NamedTuple):
    timestamp: datetime
    temperature: float
    humidity: float
    light: float
    co2: float
    humidity_ratio: float
    occupancy: int


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledDataset:
    """Time-ordered sensor rows of one split, stored column-wise.

    ``columns`` maps each canonical predictor name to a float array;
    ``labels`` is an int8 array of 0/1. All arrays are read-only.
    """

    split_name: str
    timestamps: np.ndarray
    columns: dict
    labels: np.ndarray
    source: str | None = None

    def __post_init__(self):
        n = len(self.timestamps)
        if set(self.columns) != set(PREDICTORS):
            raise DataError(f"dataset needs columns {PREDICTORS}, got {tuple(self.columns)}")
        cols = {name: _readonly(np.asarray(self.columns[name], dtype=float)) for name in PREDICTORS}
        for name, col in cols.items():
            if col.shape != (n,):
                raise DataError(f"column {name} has {col.shape[0]} rows, expected {n}")
        labels = np.asarray(self.labels)
        if labels.shape != (n,):
            raise DataError(f"labels have {labels.shape[0]} rows, expected {n}")
        if n and not np.isin(labels, (0, 1)).all():
            raise DataError("occupancy labels must be 0 or 1")
        object.__setattr__(self, "timestamps", _readonly(np.asarray(self.timestamps, dtype="datetime64[s]")))
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "labels", _readonly(labels.astype(np.int8)))

    def __len__(self) -> int:
        return len(self.timestamps)

    def __iter__(self) -> Iterator[SensorRow]:
        for i in range(len(self)):
            yield self.row(i)

    def row(self, i: int) -> SensorRow:
        c = self.columns
        return SensorRow(
            self.timestamps[i].item(),
            float(c["Temperature"][i]),
            float(c["Humidity"][i]),
            float(c["Light"][i]),
            float(c["CO2"][i]),
            float(c["HumidityRatio"][i]),
            int(self.labels[i]),
        )

    def column(self, name: str) -> np.ndarray:
        name = canonical_name(name)
        if name == LABEL:
            return self.labels.astype(float)
        if name not in self.columns:
            raise DataError(f"unknown column {name!r}")
        return self.columns[name]


@dataclass(frozen=True)
class FeatureSet:
    """Ordered, duplicate-free selection of predictor names."""

    names: tuple

    def __post_init__(self):
        names = tuple(canonical_name(str(n)) for n in self.names)
        if not names:
            raise DataError("feature set is empty")
        for n in names:
            if n == TIMESTAMP:
                raise DataError("the Date/timestamp column is not a sensor variable and cannot be a feature")
            if n == LABEL:
                raise DataError("the Occupancy label cannot be used as a feature")
            if n not in PREDICTORS:
                raise DataError(f"unknown feature {n!r}; expected one of {PREDICTORS}")
        if len(set(names)) != len(names):
            raise DataError(f"duplicate feature in {names}")
        object.__setattr__(self, "names", names)

    @classmethod
    def parse(cls, text: str) -> "FeatureSet":
        """Parse ``"Light,CO2"`` or the hyphenated ``"Light-CO2"``."""
        sep = "," if "," in text else "-"
        return cls(tuple(p for p in (s.strip() for s in text.split(sep)) if p))

    @property
    def label(self) -> str:
        return "-".join(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)


LIGHT_CO2 = FeatureSet(("Light", "CO2"))
CO2_TEMPERATURE = FeatureSet(("CO2", "Temperature"))
ALL_PREDICTORS = FeatureSet(PREDICTORS)


def _as_feature_set(fs) -> FeatureSet:
    if isinstance(fs, FeatureSet):
        return fs
    if isinstance(fs, str):
        return FeatureSet.parse(fs)
    return FeatureSet(tuple(fs))


# ---------------------------------------------------------------------------
# loading


def _parse_timestamp(text: str) -> datetime:
    for fmt in TIMESTAMP_FORMATS:
        try:
            return datetime.strptime(text.strip(), fmt)
        except ValueError:
            continue
    raise ValueError(f"unparseable timestamp {text!r}")


def _check_invariants(name: str, value: float) -> None:
    if not np.isfinite(value):
        raise ValueError("value is not finite")
    if name == "Light" and value < 0:
        raise ValueError("light must be >= 0")
    if name in ("CO2", "HumidityRatio") and value <= 0:
        raise ValueError(f"{name} must be > 0")


def parse_occupancy_csv(text: Iterable[str], split_name: str, source: str = "<text>") -> LabeledDataset:
    """Parse an iterable of CSV lines; see :func:`load_occupancy_csv`."""
    if split_name not in SPLITS:
        raise DataError(f"split_name must be one of {SPLITS}, got {split_name!r}")
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: file is empty (no header row)") from None
    names = [canonical_name(h) for h in header]
    required = (TIMESTAMP, *PREDICTORS, LABEL)
    missing = [r for r in required if r not in names]
    if missing:
        raise DataError(f"{source}: missing required column(s) {missing} in header {header}")

    stamps: list[datetime] = []
    values: dict[str, list[float]] = {p: [] for p in PREDICTORS}
    labels: list[int] = []
    for lineno, fields in enumerate(reader, start=2):
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) == len(names) + 1:
            # unnamed leading row id
            fields = fields[1:]
        elif len(fields) != len(names):
            raise DataError(f"{source}: line {lineno}: expected {len(names)} fields, got {len(fields)}")
        record = dict(zip(names, fields))
        try:
            stamps.append(_parse_timestamp(record[TIMESTAMP]))
        except ValueError as exc:
            raise DataError(f"{source}: line {lineno}, column {TIMESTAMP}: {exc}") from None
        for p in PREDICTORS:
            try:
                v = float(record[p])
                _check_invariants(p, v)
            except ValueError as exc:
                raise DataError(f"{source}: line {lineno}, column {p}: bad value {record[p]!r} ({exc})") from None
            values[p].append(v)
        raw = record[LABEL].strip()
        try:
            lab = float(raw)
        except ValueError:
            lab = -1.0
        if lab not in (0.0, 1.0):
            raise DataError(f"{source}: line {lineno}, column {LABEL}: label must be 0 or 1, got {raw!r}")
        labels.append(int(lab))

    if not labels:
        raise DataError(f"{source}: no data rows for split {split_name!r}")
    return LabeledDataset(
        split_name=split_name,
        timestamps=np.array(stamps, dtype="datetime64[s]"),
        columns={p: np.array(values[p]) for p in PREDICTORS},
        labels=np.array(labels, dtype=np.int8),
        source=source,
    )


def load_occupancy_csv(path, split_name: str) -> LabeledDataset:
    """Read one split file.

    Raises
    ------
    DataError
        If the file is missing, a required column is absent, a cell is
        malformed (message names line and column) or there are no rows.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            return parse_occupancy_csv(fh, split_name, source=str(path))
    except FileNotFoundError:
        raise DataError(f"{path}: no such file") from None
    except IsADirectoryError:
        raise DataError(f"{path}: is a directory") from None


# ---------------------------------------------------------------------------
# projection


def select_features(ds: LabeledDataset, fs) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(X, y)`` with X's columns in feature-set order."""
    fs = _as_feature_set(fs)
    X = np.column_stack([ds.columns[n] for n in fs.names])
    return X, ds.labels.astype(np.int64)


# ---------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class ColumnStats:
    count: int
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float
    std: float


STAT_FIELDS = ("min", "q1", "median", "mean", "q3", "max", "std", "count")


@dataclass(frozen=True)
class SummaryStats:
    split_name: str
    columns: dict  # name -> ColumnStats, in PREDICTORS + label order

    def __getitem__(self, name: str) -> ColumnStats:
        return self.columns[canonical_name(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["variable", *STAT_FIELDS])
        for name, st in self.columns.items():
            w.writerow([name, *(_fmt(getattr(st, f)) for f in STAT_FIELDS)])
        return buf.getvalue()

    def to_text(self) -> str:
        """Aligned fixed-width table, one variable per row."""
        rows = [["variable", *STAT_FIELDS]]
        rows += [[name, *(_fmt(getattr(st, f)) for f in STAT_FIELDS)] for name, st in self.columns.items()]
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = [
            "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))).rstrip()
            for r in rows
        ]
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{v:.6g}"


def column_stats(values) -> ColumnStats:
    """Five-number summary plus mean and sample std (ddof=1).

    Quartiles use linear interpolation between closest ranks, i.e. the value
    at fractional position ``q * (n - 1)`` of the sorted data.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise DataError("cannot summarize an empty column")
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75], method="linear")
    std = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return ColumnStats(
        count=int(x.size),
        min=float(x.min()),
        q1=float(q1),
        median=float(med),
        mean=float(x.mean()),
        q3=float(q3),
        max=float(x.max()),
        std=std,
    )


def summarize(ds: LabeledDataset) -> SummaryStats:
    if len(ds) == 0:
        raise DataError("cannot summarize an empty dataset")
    cols = {name: column_stats(ds.columns[name]) for name in PREDICTORS}
    cols[LABEL] = column_stats(ds.labels)
    return SummaryStats(ds.split_name, cols)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson correlations; entries involving a zero-variance column are
    NaN and listed in ``undefined``."""

    names: tuple
    values: np.ndarray
    undefined: frozenset = field(default_factory=frozenset)

    def __getitem__(self, pair) -> float:
        a, b = (canonical_name(p) for p in pair)
        return float(self.values[self.names.index(a), self.names.index(b)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["", *self.names])
        for name, row in zip(self.names, self.values):
            w.writerow([name, *("undefined" if np.isnan(v) else f"{v:.6f}" for v in row)])
        return buf.getvalue()


def pearson_correlation(ds: LabeledDataset, names: Sequence[str] | None = None) -> CorrelationMatrix:
    """Correlation matrix over predictors and/or the Occupancy label.

    Defaults to all five predictors plus the label.
    """
    if names is None:
        names = (*PREDICTORS, LABEL)
    names = tuple(canonical_name(n) for n in names)
    if len(ds) < 2:
        raise DataError("correlation needs at least 2 rows")
    cols = np.column_stack([ds.column(n) for n in names])
    return _correlate(names, cols)


def _correlate(names: tuple, cols: np.ndarray) -> CorrelationMatrix:
    centered = cols - cols.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    degenerate = ss == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.sqrt(ss)
        r = (centered.T @ centered) / np.outer(scale, scale)
    r = np.clip(r, -1.0, 1.0)
    r = (r + r.T) / 2
    np.fill_diagonal(r, 1.0)
    r[degenerate, :] = np.nan
    r[:, degenerate] = np.nan
    r.setflags(write=False)
    return CorrelationMatrix(names, r, frozenset(n for n, d in zip(names, degenerate) if d))


# ---------------------------------------------------------------------------
# scaling


@dataclass(frozen=True)
class Standardizer:
    """Per-feature centring/scaling fitted on training data only.

    Uses the population std (ddof=0). Zero-std features are ``degenerate``
    and are mapped to zeros.
    """

    mean: np.ndarray
    std: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return self.std == 0

    def transform(self, X) -> np.ndarray:
        return apply_standardizer(self, X)


def fit_standardizer(X) -> Standardizer:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("standardizer needs a non-empty 2-D training matrix")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    if (std == 0).any():
        warnings.warn(
            f"zero-variance feature column(s) {np.flatnonzero(std == 0).tolist()}; they will standardize to 0",
            RuntimeWarning,
            stacklevel=2,
        )
    return Standardizer(_readonly(mean), _readonly(std))


def apply_standardizer(s: Standardizer, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != s.mean.shape[0]:
        raise DataError(f"expected {s.mean.shape[0]} feature columns, got shape {X.shape}")
    safe = np.where(s.std == 0, 1.0, s.std)
    Z = (X - s.mean) / safe
    Z[:, s.std == 0] = 0.0
    return Z


# ---------------------------------------------------------------------------
# plot-data export


def export_timeseries(ds: LabeledDataset, fs, out_path) -> Path:
    """Write ``timestamp,<feature>...`` CSV with ISO-8601 timestamps.

    Values are written with ``repr`` so that :func:`read_timeseries`
    recovers them exactly.
    """
    fs = _as_feature_set(fs)
    out_path = Path(out_path)
    try:
        with out_path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["timestamp", *fs.names])
            cols = [ds.columns[n] for n in fs.names]
            for i, ts in enumerate(ds.timestamps):
                w.writerow([str(ts), *(repr(float(c[i])) for c in cols)])
    except OSError as exc:
        raise DataError(f"cannot write {out_path}: {exc.strerror or exc}") from None
    return out_path


def read_timeseries(path) -> tuple[np.ndarray, dict]:
    """Inverse of :func:`export_timeseries`: ``(timestamps, {name: values})``."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    stamps = np.array([r[0] for r in rows], dtype="datetime64[s]")
    cols = {name: np.array([float(r[j]) for r in rows]) for j, name in enumerate(header[1:], start=1)}
    return stamps, cols
