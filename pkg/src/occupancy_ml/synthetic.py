"""Synthetic occupancy-like sensor files for tests and demos.

The generator mimics the qualitative structure of office sensor logs: minute
sampling, weekday office hours, bright artificial light and rising CO2 while
occupied, dark weekends. It is not a substitute for the real measurements.
"""

from __future__ import annotations

from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .data import LabeledDataset, PREDICTORS

HEADER = '"date","Temperature","Humidity","Light","CO2","HumidityRatio","Occupancy"'


def humidity_ratio(temperature_c, relative_humidity, pressure_pa: float = 101325.0):
    """kg water per kg dry air from temperature and RH (Magnus saturation)."""
    t = np.asarray(temperature_c, dtype=float)
    p_sat = 611.2 * np.exp(17.62 * t / (243.12 + t))
    p_v = np.asarray(relative_humidity, dtype=float) / 100.0 * p_sat
    return 0.622 * p_v / (pressure_pa - p_v)


def make_split(
    start: datetime,
    n_rows: int,
    split_name: str,
    seed: int = 0,
    door_open: bool = False,
    step_minutes: int = 1,
) -> LabeledDataset:
    rng = np.random.default_rng(seed)
    stamps = np.array([start + timedelta(minutes=step_minutes * i) for i in range(n_rows)], dtype="datetime64[s]")
    hours = (stamps - stamps.astype("datetime64[D]")).astype(float) / 3600.0
    weekday = (stamps.astype("datetime64[D]").view("int64") - 4) % 7  # 0 = Monday
    workday = weekday < 5

    arrive = 8.0 + rng.normal(0, 0.3)
    leave = 17.5 + rng.normal(0, 0.3)
    occ = (workday & (hours >= arrive) & (hours < leave)).astype(np.int8)
    # lunch break and short absences
    lunch = (hours >= 12.0) & (hours < 12.75)
    occ[lunch & (rng.random(n_rows) < 0.9)] = 0

    daylight = np.clip(np.sin((hours - 6.0) / 12.0 * np.pi), 0, None) * 180.0
    light = np.where(occ == 1, 430 + rng.normal(0, 25, n_rows), daylight * rng.uniform(0.2, 1.0))
    # occasional weekend light blips
    blips = (~workday) & (rng.random(n_rows) < 0.002)
    light[blips] = rng.uniform(300, 1500, blips.sum())
    light = np.clip(light, 0, None).round(2)

    co2 = np.empty(n_rows)
    level = 440.0
    vent = 0.05 if door_open else 0.015
    for i in range(n_rows):
        target = 1100.0 if occ[i] else 430.0
        level += (target - level) * (vent if occ[i] else 0.01) + rng.normal(0, 3)
        co2[i] = level
    co2 = np.clip(co2, 400, None).round(2)

    temperature = 20.5 + 1.5 * np.convolve(occ, np.ones(min(60, max(n_rows, 1))) / 60, mode="same") + rng.normal(0, 0.15, n_rows)
    humidity = 24.0 + 3.0 * np.sin(np.arange(n_rows) / 900.0) + rng.normal(0, 0.3, n_rows) - (2.0 if door_open else 0)
    temperature = temperature.round(3)
    humidity = humidity.round(3)
    hr = humidity_ratio(temperature, humidity)

    cols = dict(zip(PREDICTORS, (temperature, humidity, light, co2, hr)))
    return LabeledDataset(split_name, stamps, cols, occ)


def make_splits(seed: int = 0, sizes=(3000, 1200, 3600)) -> dict:
    """Three chronologically separate splits: validation (door open) before
    train, test after, each starting on a weekday evening."""
    base = datetime(2015, 2, 4, 17, 51)
    train = make_split(base, sizes[0], "train", seed)
    valid = make_split(base - timedelta(days=2), sizes[1], "validation", seed + 1, door_open=True)
    test = make_split(base + timedelta(days=7), sizes[2], "test", seed + 2)
    return {"train": train, "validation": valid, "test": test}


def to_csv_text(ds: LabeledDataset) -> str:
    """Render in the public dataset's layout (quoted row id + date)."""
    lines = [HEADER]
    c = ds.columns
    for i in range(len(ds)):
        ts = str(ds.timestamps[i]).replace("T", " ")
        vals = ",".join(repr(float(c[p][i])) for p in PREDICTORS)
        lines.append(f'"{i + 1}","{ts}",{vals},{int(ds.labels[i])}')
    return "\n".join(lines) + "\n"


def write_splits(directory, seed: int = 0, sizes=(3000, 1200, 3600)) -> dict:
    """Write ``datatraining.txt``, ``datatest.txt`` (validation) and
    ``datatest2.txt`` (test) and return their paths by split name."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = {"train": "datatraining.txt", "validation": "datatest.txt", "test": "datatest2.txt"}
    paths = {}
    for split, ds in make_splits(seed, sizes).items():
        path = directory / names[split]
        path.write_text(to_csv_text(ds), encoding="utf-8")
        paths[split] = path
    return paths
