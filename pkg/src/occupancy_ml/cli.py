"""Command-line entry point: ``summarize``, ``explore``, ``benchmark``, ``sweep``.

Exit codes::

    0  success
    2  usage error (bad flags, bad feature set, empty grid axis, ...)
    3  input/output error (missing or malformed split file, unwritable output)
    4  tolerance failure (only with --strict)

Configuration precedence: command-line flags, then a JSON ``--config``
file, then built-in defaults. The effective configuration is written to
``<out>/config_<command>.json``. Nothing is written outside ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .data import (
    ALL_PREDICTORS,
    DataError,
    FeatureSet,
    load_occupancy_csv,
    export_timeseries,
    pearson_correlation,
    summarize,
)
from .evaluation import (
    PUBLISHED_CONFIGS,
    GridSpec,
    default_grid,
    grid_search,
    run_benchmark,
    table8_reports,
    tolerance_for,
)
from .models import FAMILIES, SHORT_NAMES, TITLES, canonical_family

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_TOLERANCE = 4


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ""
    train: str | None = None
    valid: str | None = None
    test: str | None = None
    out: str = "results"
    seed: int = 0
    features: str | None = None
    model: str | None = None
    standardize: bool = True
    strict: bool = False
    format: str = "both"
    grid: dict | None = None
    jobs: int = 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--train", help="training split file")
    common.add_argument("--valid", help="validation split file")
    common.add_argument("--test", help="test split file")
    common.add_argument("--out", help="output directory (default: results)")
    common.add_argument("--seed", type=int, help="random_state for every seeded model (default 0)")
    common.add_argument("--features", help="feature set, e.g. Light,CO2 or Light-CO2")
    common.add_argument("--model", help="model family, e.g. knn, gbm, LR")
    common.add_argument("--no-standardize", dest="standardize", action="store_const", const=False, help="raw features for LR/SVM/KNN")
    common.add_argument("--strict", action="store_const", const=True, help="exit 4 if any cell misses its tolerance")
    common.add_argument("--format", choices=("csv", "md", "both"), help="table output format (default both)")
    common.add_argument("--grid", help="sweep grid as JSON object or path to a JSON file: {axis: [values...]}")
    common.add_argument("--jobs", type=int, help="worker threads for independent cells (default 1)")
    common.add_argument("--config", help="JSON file with any of the options above")

    parser = argparse.ArgumentParser(prog="occupancy-bench", description="Occupancy-detection classifier benchmark.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("summarize", parents=[common], help="summary statistics per split")
    sub.add_parser("explore", parents=[common], help="correlation matrix and time-series plot data")
    sub.add_parser("benchmark", parents=[common], help="reproduce the accuracy tables with the published hyperparameters")
    sub.add_parser("sweep", parents=[common], help="grid search one family on the validation split")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        known = {f.name for f in fields(RunConfig)} - {"command"}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config key(s): {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for f in fields(RunConfig):
        if f.name in ("command", "grid"):
            continue
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    if args.grid is not None:
        cfg.grid = _parse_grid(args.grid)
    if cfg.format not in ("csv", "md", "both"):
        raise UsageError(f"--format must be csv, md or both, got {cfg.format!r}")
    return cfg


def _parse_grid(text: str) -> dict:
    candidate = Path(text)
    try:
        if candidate.is_file():
            text = candidate.read_text(encoding="utf-8")
    except OSError:
        pass
    try:
        grid = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--grid is neither a JSON object nor a readable JSON file: {exc}") from None
    if not isinstance(grid, dict) or not all(isinstance(v, list) for v in grid.values()):
        raise UsageError("--grid must be a JSON object mapping axis names to lists")
    return grid


# ---------------------------------------------------------------------------
# output helpers


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def markdown_table(header, rows) -> str:
    cells = [[str(c) for c in header]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    line = lambda r: "| " + " | ".join(c.ljust(w) for c, w in zip(r, widths)) + " |"  # noqa: E731
    out = [line(cells[0]), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    out += [line(r) for r in cells[1:]]
    return "\n".join(out) + "\n"


class Writer:
    def __init__(self, out_dir: str, fmt: str):
        self.root = Path(out_dir)
        self.fmt = fmt
        self.written: list[Path] = []
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create output directory {self.root}: {exc.strerror}") from None

    def path(self, name: str) -> Path:
        p = (self.root / name).resolve()
        if self.root.resolve() not in p.parents:
            raise UsageError(f"refusing to write outside {self.root}: {name}")
        return p

    def text(self, name: str, content: str) -> Path:
        p = self.path(name)
        try:
            p.write_text(content, encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot write {p}: {exc.strerror}") from None
        self.written.append(p)
        return p

    def table(self, stem: str, header, rows, md_rows=None, title: str | None = None) -> None:
        if self.fmt in ("csv", "both"):
            self.text(f"{stem}.csv", csv_text(header, rows))
        if self.fmt in ("md", "both"):
            body = markdown_table(header, md_rows if md_rows is not None else rows)
            self.text(f"{stem}.md", (f"## {title}\n\n" if title else "") + body)


def _echo_config(writer: Writer, cfg: RunConfig) -> None:
    writer.text(f"config_{cfg.command}.json", json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n")


def _load_splits(cfg: RunConfig, required: tuple) -> dict:
    paths = {"train": cfg.train, "validation": cfg.valid, "test": cfg.test}
    missing = [s for s in required if not paths[s]]
    if missing:
        flags = {"train": "--train", "validation": "--valid", "test": "--test"}
        raise UsageError(f"{cfg.command} needs {', '.join(flags[m] for m in missing)}")
    return {split: load_occupancy_csv(p, split) for split, p in paths.items() if p}


def _feature_set(text: str | None, default: FeatureSet) -> FeatureSet:
    if not text:
        return default
    try:
        return FeatureSet.parse(text)
    except DataError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands


def cmd_summarize(cfg: RunConfig) -> int:
    splits = _load_splits(cfg, ())
    if not splits:
        raise UsageError("summarize needs at least one of --train/--valid/--test")
    w = Writer(cfg.out, cfg.format)
    _echo_config(w, cfg)
    from .data import STAT_FIELDS

    for name, ds in splits.items():
        stats = summarize(ds)
        print(f"{name}: {len(ds)} rows")
        print(stats.to_text())
        w.text(f"summary_{name}.txt", stats.to_text())
        rows = [[var, *(_fmt(getattr(st, f)) for f in STAT_FIELDS)] for var, st in stats.columns.items()]
        if cfg.format in ("csv", "both"):
            w.text(f"summary_{name}.csv", stats.to_csv())
        if cfg.format in ("md", "both"):
            w.text(f"summary_{name}.md", f"## Summary statistics - {name} ({len(ds)} rows)\n\n" + markdown_table(["variable", *STAT_FIELDS], rows))
    return EXIT_OK


def cmd_explore(cfg: RunConfig) -> int:
    splits = _load_splits(cfg, ())
    if not splits:
        raise UsageError("explore needs at least one of --train/--valid/--test")
    fs = _feature_set(cfg.features, ALL_PREDICTORS)
    w = Writer(cfg.out, cfg.format)
    _echo_config(w, cfg)
    for name, ds in splits.items():
        corr = pearson_correlation(ds)
        w.text(f"correlation_{name}.csv", corr.to_csv())
        for feature in fs.names:
            target = w.path(f"timeseries_{name}_{feature}.csv")
            export_timeseries(ds, FeatureSet((feature,)), target)
            w.written.append(target)
        print(f"{name}: correlation matrix and {len(fs)} time series written")
    return EXIT_OK


def _report_rows(reports):
    header = [
        "features",
        "hyperparameters",
        "train",
        "train_reported",
        "train_delta",
        "validation",
        "validation_reported",
        "validation_delta",
        "test",
        "test_reported",
        "test_delta",
        "tolerance",
        "within_tolerance",
        "error",
    ]
    rows, md_rows = [], []
    for r in reports:
        hp = json.dumps(r.hyperparameters, sort_keys=True)
        tol = tolerance_for(r.feature_set)
        dev = r.deviations() or (None, None, None)
        ref = r.reported or (None, None, None)
        row = [r.feature_set.label, hp]
        md = [r.feature_set.label, hp.replace("|", "/")]
        for acc, rep, d in zip(r.accuracies, ref, dev):
            row += [_fmt(acc), _fmt(rep), _fmt(d)]
            md += ["FAILED" if r.failed else f"{acc:.4f} (Δ{d:.4f})", _fmt(rep), _fmt(d)]
        ok = "" if r.failed else str(r.within_tolerance(tol))
        row += [_fmt(tol), ok, r.error or ""]
        md += [_fmt(tol), ok, r.error or ""]
        rows.append(row)
        md_rows.append(md)
    return header, rows, md_rows


def cmd_benchmark(cfg: RunConfig) -> int:
    splits = _load_splits(cfg, ("train", "validation", "test"))
    configs = list(PUBLISHED_CONFIGS)
    if cfg.model:
        try:
            fam = canonical_family(cfg.model)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        configs = [c for c in configs if c.family == fam]
    if cfg.features:
        fs = _feature_set(cfg.features, None)
        configs = [c for c in configs if c.feature_set == fs]
        if not configs:
            raise UsageError(f"no published configuration uses feature set {fs.label}")
    w = Writer(cfg.out, cfg.format)
    _echo_config(w, cfg)
    reports = run_benchmark(
        splits["train"], splits["validation"], splits["test"], configs, cfg.standardize, cfg.seed, max(1, cfg.jobs)
    )

    failures = 0
    for table in sorted({r.table for r in reports}):
        rs = [r for r in reports if r.table == table]
        family = rs[0].family
        header, rows, md_rows = _report_rows(rs)
        w.table(f"table{table}_{family}", header, rows, md_rows, title=f"Table {table}: {TITLES[family]}")
        failures += sum(1 for r in rs if not r.within_tolerance())

    t8 = [(f, r, ref) for f, r, ref in table8_reports(reports) if r is not None]
    if t8:
        header = ["Light-CO2", *(SHORT_NAMES[f] for f, _, _ in t8)]
        rows, md_rows = [], []
        for i, split in enumerate(("train", "validation", "test")):
            label = {"train": "Train Accuracy", "validation": "Valid Accuracy", "test": "Test Accuracy"}[split]
            row, md = [label], [label]
            for _, r, ref in t8:
                acc = None if r.failed else r.accuracies[i]
                row.append(_fmt(acc))
                md.append("FAILED" if acc is None else f"{acc:.4f} (reported {ref[i]:.2f}, Δ{abs(acc - ref[i]):.4f})")
            rows.append(row)
            md_rows.append(md)
        w.table("table8_light_co2", header, rows, md_rows, title="Table 8: accuracy for models using Light-CO2")
        failures += sum(1 for _, r, ref in t8 if not r.within_tolerance(0.03, ref))

    for r in reports:
        status = "FAILED " + r.error if r.failed else " ".join(f"{a:.4f}" for a in r.accuracies)
        flag = "" if r.failed or r.within_tolerance() else "  [outside tolerance]"
        print(f"T{r.table} {SHORT_NAMES[r.family]:6s} {r.feature_set.label:16s} {status}{flag}")
    if cfg.strict and failures:
        print(f"{failures} cell group(s) outside tolerance", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    if not cfg.model:
        raise UsageError("sweep needs --model")
    try:
        family = canonical_family(cfg.model)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    fs = _feature_set(cfg.features, FeatureSet(("Light", "CO2")))
    try:
        if cfg.grid is not None:
            fixed = {"random_state": cfg.seed} if family not in ("knn", "naive_bayes") else {}
            fixed = {k: v for k, v in fixed.items() if k not in cfg.grid}
            grid = GridSpec(family, cfg.grid, fixed)
        else:
            grid = default_grid(family, cfg.seed)
    except (ValueError, NotImplementedError) as exc:
        raise UsageError(f"invalid grid: {exc}") from None
    splits = _load_splits(cfg, ("train", "validation"))
    w = Writer(cfg.out, cfg.format)
    _echo_config(w, cfg)
    result = grid_search(grid, fs, splits["train"], splits["validation"], cfg.standardize, max(1, cfg.jobs))

    axis_names = [name for name, _ in grid.axes]
    header = ["cell", *axis_names, "train_accuracy", "validation_accuracy", "status", "reason"]
    rows = [
        [c.index, *(c.params[n] for n in axis_names), _fmt(c.train_accuracy), _fmt(c.validation_accuracy), c.status, c.reason]
        for c in result.trace
    ]
    stem = f"sweep_{family}_{fs.label}"
    w.table(stem, header, rows, title=f"Sweep: {TITLES[family]} on {fs.label}")
    best = {
        "family": family,
        "features": list(fs.names),
        "best_params": result.best_params,
        "best_validation_accuracy": result.best_validation_accuracy,
        "cells": len(result.trace),
        "failed_cells": sum(1 for c in result.trace if c.status != "ok"),
    }
    w.text(f"{stem}_best.json", json.dumps(best, indent=2, sort_keys=True) + "\n")
    print(f"{len(result.trace)} cells; best {result.best_params} validation accuracy {_fmt(result.best_validation_accuracy)}")
    return EXIT_OK


COMMANDS = {"summarize": cmd_summarize, "explore": cmd_explore, "benchmark": cmd_benchmark, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
