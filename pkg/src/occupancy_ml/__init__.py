"""Occupancy detection from office sensor readings with seven classifier families."""

from .data import (
    ALL_PREDICTORS,
    CO2_TEMPERATURE,
    LIGHT_CO2,
    DataError,
    FeatureSet,
    LabeledDataset,
    load_occupancy_csv,
    parse_occupancy_csv,
    pearson_correlation,
    select_features,
    summarize,
)
from .evaluation import (
    PUBLISHED_CONFIGS,
    EvaluationReport,
    GridSpec,
    accuracy,
    default_grid,
    evaluate,
    grid_search,
    run_benchmark,
)
from .models import FAMILIES, TrainedModel, fit_model

__version__ = "0.1.0"

__all__ = [
    "ALL_PREDICTORS",
    "CO2_TEMPERATURE",
    "LIGHT_CO2",
    "DataError",
    "FeatureSet",
    "LabeledDataset",
    "load_occupancy_csv",
    "parse_occupancy_csv",
    "pearson_correlation",
    "select_features",
    "summarize",
    "PUBLISHED_CONFIGS",
    "EvaluationReport",
    "GridSpec",
    "accuracy",
    "default_grid",
    "evaluate",
    "grid_search",
    "run_benchmark",
    "FAMILIES",
    "TrainedModel",
    "fit_model",
]
