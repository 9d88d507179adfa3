"""dirtybench: measure how dirty data degrade classical learning algorithms."""

from .data import (
    CATEGORICAL,
    Column,
    Dataset,
    FDRule,
    NUMERIC,
    Schema,
    dataset_from_rows,
    detect_error_rates,
    load_dataset,
    parse_fd_rules,
    save_dataset,
)
from .corrupt import CorruptionSpec, derive_seed, impute, inject
from .evaluate import (
    Algorithm,
    EvalResult,
    cross_validate,
    evaluate_algorithm,
    evaluate_clustering,
    macro_precision_recall_f,
    match_clusters,
    regression_measures,
)
from .robustness import (
    Guideline,
    MetricSeries,
    RateGrid,
    RobustnessReport,
    SweepDataset,
    keeping_point,
    recommend,
    run_sweep,
    sensibility,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "CATEGORICAL",
    "Column",
    "CorruptionSpec",
    "Dataset",
    "EvalResult",
    "FDRule",
    "Guideline",
    "MetricSeries",
    "NUMERIC",
    "RateGrid",
    "RobustnessReport",
    "Schema",
    "SweepDataset",
    "cross_validate",
    "dataset_from_rows",
    "derive_seed",
    "detect_error_rates",
    "evaluate_algorithm",
    "evaluate_clustering",
    "impute",
    "inject",
    "keeping_point",
    "load_dataset",
    "macro_precision_recall_f",
    "match_clusters",
    "parse_fd_rules",
    "recommend",
    "regression_measures",
    "run_sweep",
    "save_dataset",
    "sensibility",
]
