"""Robustness metrics over error-rate sweeps, and selection guidance.

``sensibility`` is the total absolute variation of a measure along the rate
grid (larger = more quality-sensitive).  ``keeping_point`` is the last grid
rate before the measure first degrades by more than the threshold k relative
to the clean baseline (larger = more error-tolerant).  ``run_sweep`` builds
the full (dataset x algorithm x error type x rate) grid of evaluations and
reduces it to both metrics plus per-algorithm averages and rankings;
``recommend`` walks the stepwise selection guidance over a finished report.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corrupt import CONFLICTING, CorruptionSpec, ERROR_TYPES, INCONSISTENT, derive_seed
from .data import Dataset, FDRule
from .errors import ConfigurationError, ParameterError
from .evaluate import (
    Algorithm,
    CLASSIFICATION,
    CLUSTERING,
    EvalResult,
    LOWER_IS_BETTER,
    REGRESSION,
    evaluate_algorithm,
    measures_of,
    scripted_result,
    task_of,
)

HIGHER = "higher"
LOWER = "lower"


@dataclass(frozen=True)
class MetricSeries:
    """Measure values sampled along a uniformly spaced, ascending rate grid."""

    rates: tuple[float, ...]
    values: tuple[float, ...]
    direction: str = HIGHER

    def __post_init__(self):
        if len(self.rates) != len(self.values):
            raise ParameterError("rates and values must have equal length")
        if self.direction not in (HIGHER, LOWER):
            raise ParameterError(f"unknown direction {self.direction!r}")
        diffs = [b - a for a, b in zip(self.rates, self.rates[1:])]
        if any(d <= 0 for d in diffs):
            raise ParameterError("rates must be strictly ascending")
        if diffs and any(abs(d - diffs[0]) > 1e-9 for d in diffs):
            raise ParameterError("rates must be uniformly spaced")


def sensibility(series: MetricSeries) -> float:
    """Sum of absolute consecutive changes along the rate grid."""
    if len(series.values) < 2:
        raise ParameterError("sensibility needs at least two grid points")
    return float(sum(abs(b - a) for a, b in zip(series.values, series.values[1:])))


def keeping_point(series: MetricSeries, k: float) -> float:
    """Largest grid rate reached before the measure first moves more than k
    away from the baseline in the degrading direction; the last grid rate
    when it never does."""
    if k <= 0:
        raise ParameterError("k must be positive")
    if len(series.values) < 2:
        raise ParameterError("keeping point needs at least two grid points")
    baseline = series.values[0]
    for i in range(1, len(series.values)):
        drop = (
            baseline - series.values[i]
            if series.direction == HIGHER
            else series.values[i] - baseline
        )
        if drop > k:
            return series.rates[i - 1]
    return series.rates[-1]


@dataclass(frozen=True)
class RateGrid:
    """Arithmetic rate sequence start, start+step, ..., start+count*step."""

    start: float = 0.0
    step: float = 0.02
    count: int = 25

    def __post_init__(self):
        if self.count < 0:
            raise ParameterError("count must be non-negative")
        if self.count > 0 and self.step <= 0:
            raise ParameterError("step must be positive")
        if self.start < 0 or self.last > 1.0 + 1e-9:
            raise ParameterError("rates must stay within [0, 1]")

    @property
    def last(self) -> float:
        return self.start + self.count * self.step

    def rates(self) -> tuple[float, ...]:
        return tuple(round(self.start + i * self.step, 12) for i in range(self.count + 1))


# ---------------------------------------------------------------------------
# sweep orchestration
# ---------------------------------------------------------------------------

@dataclass
class SweepDataset:
    """A dataset registered for sweeping, with its corruption context."""

    name: str
    dataset: Dataset
    task: str
    rules: tuple[FDRule, ...] = ()
    entity_key: tuple[str, ...] = ()
    column_mask: tuple[str, ...] | None = None
    corrupt_target_in_train: bool = False

    def __post_init__(self):
        if self.task not in (CLASSIFICATION, CLUSTERING, REGRESSION):
            raise ConfigurationError(f"unknown task {self.task!r}")
        if not self.rules:
            self.rules = self.dataset.rules
        if not self.entity_key:
            self.entity_key = tuple(
                self.dataset.schema.columns[j].name for j in self.dataset.schema.key_indices
            )


@dataclass
class SeriesEntry:
    dataset: str
    algorithm: str
    task: str
    error_type: str
    measure: str
    series: MetricSeries | None
    sensibility: float | None
    keeping_point: float | None
    flags: tuple[str, ...] = ()


@dataclass
class AlgorithmSummary:
    task: str
    algorithm: str
    error_type: str
    measure: str
    mean_sensibility: float | None
    mean_keeping_point: float | None
    n_datasets: int


@dataclass
class RobustnessReport:
    grid: RateGrid
    seed: int
    k_classification: float
    k_regression: float
    entries: list[SeriesEntry] = field(default_factory=list)
    summaries: list[AlgorithmSummary] = field(default_factory=list)
    rankings: list[dict] = field(default_factory=list)
    results: list[EvalResult] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    def entry(self, dataset: str, algorithm: str, error_type: str, measure: str) -> SeriesEntry:
        for e in self.entries:
            if (e.dataset, e.algorithm, e.error_type, e.measure) == (
                dataset, algorithm, error_type, measure,
            ):
                return e
        raise KeyError((dataset, algorithm, error_type, measure))

    def summary(self, algorithm: str, error_type: str, measure: str) -> AlgorithmSummary:
        for s in self.summaries:
            if (s.algorithm, s.error_type, s.measure) == (algorithm, error_type, measure):
                return s
        raise KeyError((algorithm, error_type, measure))

    def clean_value(self, task: str, algorithm: str, measure: str) -> float | None:
        """Baseline (first grid rate) measure averaged across datasets."""
        vals = []
        for e in self.entries:
            if e.task == task and e.algorithm == algorithm and e.measure == measure:
                if e.series is not None and e.series.values:
                    vals.append(e.series.values[0])
        return float(np.mean(vals)) if vals else None

    def metric_table(self, task: str, metric: str) -> tuple[list[str], list[list]]:
        """Algorithm-by-(error type x measure) matrix of mean sensibility or
        mean keeping point, shaped like the published summary tables."""
        if metric not in ("sensibility", "keeping_point"):
            raise ParameterError("metric must be 'sensibility' or 'keeping_point'")
        measures = measures_of(REGRESSION if task == REGRESSION else CLASSIFICATION)
        error_types = sorted({s.error_type for s in self.summaries}, key=ERROR_TYPES.index)
        header = ["algorithm"] + [f"{et}_{m}" for et in error_types for m in measures]
        algorithms = []
        for s in self.summaries:
            if s.task == task and s.algorithm not in algorithms:
                algorithms.append(s.algorithm)
        rows = []
        for algo in algorithms:
            row: list = [algo]
            for et in error_types:
                for m in measures:
                    try:
                        s = self.summary(algo, et, m)
                        value = (
                            s.mean_sensibility if metric == "sensibility"
                            else s.mean_keeping_point
                        )
                    except KeyError:
                        value = None
                    row.append(value)
            rows.append(row)
        return header, rows

    def to_json_dict(self) -> dict:
        return {
            "grid": {"start": self.grid.start, "step": self.grid.step, "count": self.grid.count},
            "seed": self.seed,
            "k_classification": self.k_classification,
            "k_regression": self.k_regression,
            "entries": [
                {
                    "dataset": e.dataset,
                    "algorithm": e.algorithm,
                    "task": e.task,
                    "error_type": e.error_type,
                    "measure": e.measure,
                    "rates": list(e.series.rates) if e.series else None,
                    "values": list(e.series.values) if e.series else None,
                    "direction": e.series.direction if e.series else None,
                    "sensibility": e.sensibility,
                    "keeping_point": e.keeping_point,
                    "flags": list(e.flags),
                }
                for e in self.entries
            ],
            "summaries": [vars(s) for s in self.summaries],
            "rankings": self.rankings,
            "errors": self.errors,
            "results": [r.ledger_row() for r in self.results],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "RobustnessReport":
        report = cls(
            grid=RateGrid(**data["grid"]),
            seed=data["seed"],
            k_classification=data["k_classification"],
            k_regression=data["k_regression"],
        )
        for e in data["entries"]:
            series = None
            if e["rates"] is not None:
                series = MetricSeries(tuple(e["rates"]), tuple(e["values"]), e["direction"])
            report.entries.append(SeriesEntry(
                dataset=e["dataset"], algorithm=e["algorithm"], task=e["task"],
                error_type=e["error_type"], measure=e["measure"], series=series,
                sensibility=e["sensibility"], keeping_point=e["keeping_point"],
                flags=tuple(e["flags"]),
            ))
        report.summaries = [AlgorithmSummary(**s) for s in data["summaries"]]
        report.rankings = list(data["rankings"])
        report.errors = list(data["errors"])
        return report


def _spec_for(ds: SweepDataset, error_type: str, rate: float, seed: int) -> CorruptionSpec | None:
    if rate == 0:
        return None
    return CorruptionSpec(
        error_type=error_type,
        rate=rate,
        seed=derive_seed(seed, ds.name, error_type, rate),
        column_mask=ds.column_mask,
        corrupt_target_in_train=ds.corrupt_target_in_train,
        rules=ds.rules if error_type == INCONSISTENT else (),
        entity_key=ds.entity_key if error_type == CONFLICTING else (),
    )


def algorithm_label(algorithm: Algorithm) -> str:
    if algorithm.name == "scripted":
        return algorithm.params.get("label", "scripted")
    return algorithm.name


def _run_combination(payload):
    ds, algorithm, error_type, rate, seed, folds, timing_repeats = payload
    key = (ds.name, algorithm_label(algorithm), error_type, rate)
    try:
        if algorithm.name == "scripted":
            result = scripted_result(ds.name, algorithm, error_type, rate,
                                     derive_seed(seed, ds.name))
        else:
            spec = _spec_for(ds, error_type, rate, seed)
            result = evaluate_algorithm(
                ds.dataset, algorithm, spec,
                folds=folds,
                seed=derive_seed(seed, ds.name),
                timing_repeats=timing_repeats,
                dataset_name=ds.name,
            )
        return key, result, None
    except Exception as exc:  # a failed combination must not kill the sweep
        return key, None, f"{type(exc).__name__}: {exc}"


def run_sweep(
    datasets: Sequence[SweepDataset],
    algorithms: Sequence[Algorithm],
    error_types: Sequence[str] = ("missing",),
    grid: RateGrid = RateGrid(),
    seed: int = 0,
    k_classification: float = 0.10,
    k_regression: float = 0.1,
    folds: int = 10,
    timing_repeats: int = 5,
    jobs: int = 1,
) -> RobustnessReport:
    """Evaluate every combination, then reduce to series, metrics, averages,
    and sensibility rankings.  Deterministic for a fixed seed regardless of
    worker count; a failing combination is recorded and skipped."""
    if grid.start != 0.0:
        raise ConfigurationError("rate grid must start at the clean baseline 0")
    for et in error_types:
        if et not in ERROR_TYPES:
            raise ConfigurationError(f"unknown error type {et!r}")
    if not algorithms:
        raise ConfigurationError("no algorithms selected")
    if not datasets:
        raise ConfigurationError("no datasets selected")

    tasks = []
    for ds in datasets:
        for algorithm in algorithms:
            if task_of(algorithm) != ds.task:
                continue
            for et in error_types:
                for rate in grid.rates():
                    tasks.append((ds, algorithm, et, rate, seed, folds, timing_repeats))
    if not tasks:
        raise ConfigurationError("no (dataset, algorithm) pair matches by task")

    outcomes = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, result, error in pool.map(_run_combination, tasks):
                outcomes[key] = (result, error)
    else:
        for payload in tasks:
            key, result, error = _run_combination(payload)
            outcomes[key] = (result, error)

    report = RobustnessReport(
        grid=grid, seed=seed,
        k_classification=k_classification, k_regression=k_regression,
    )
    rates = grid.rates()
    for ds in datasets:
        for algorithm in algorithms:
            if task_of(algorithm) != ds.task:
                continue
            algo_label = algorithm_label(algorithm)
            for et in error_types:
                failures = []
                point_results = []
                for rate in rates:
                    result, error = outcomes[(ds.name, algo_label, et, rate)]
                    if error is not None:
                        failures.append({"dataset": ds.name, "algorithm": algo_label,
                                         "error_type": et, "rate": rate, "message": error})
                    else:
                        point_results.append(result)
                        report.results.append(result)
                report.errors.extend(failures)
                k = k_regression if ds.task == REGRESSION else k_classification
                for measure in measures_of(ds.task):
                    report.entries.append(_series_entry(
                        ds, algo_label, et, measure, rates, point_results,
                        bool(failures), k,
                    ))
    _summarize(report, datasets, algorithms, error_types)
    return report


def _series_entry(ds, algo_label, error_type, measure, rates, point_results,
                  had_failures, k) -> SeriesEntry:
    flags = []
    values = []
    by_rate = {r.rate: r for r in point_results}
    for rate in rates:
        r = by_rate.get(rate)
        values.append(None if r is None else r.measures.get(measure))
    direction = LOWER if measure in LOWER_IS_BETTER else HIGHER
    if had_failures or any(v is None for v in values):
        if had_failures:
            flags.append("incomplete-series")
        if any(v is None for v in values) and not had_failures:
            flags.append("undefined-points")
        series = None
        sens = kp = None
    else:
        series = MetricSeries(tuple(rates), tuple(float(v) for v in values), direction)
        if len(rates) >= 2:
            sens = sensibility(series)
            kp = keeping_point(series, k)
        else:
            flags.append("degenerate-grid")
            sens = kp = None
    return SeriesEntry(
        dataset=ds.name, algorithm=algo_label, task=ds.task, error_type=error_type,
        measure=measure, series=series, sensibility=sens, keeping_point=kp,
        flags=tuple(flags),
    )


def _summarize(report: RobustnessReport, datasets, algorithms, error_types):
    combos: list[tuple[str, str]] = []
    for ds in datasets:
        for algorithm in algorithms:
            if task_of(algorithm) != ds.task:
                continue
            label = algorithm_label(algorithm)
            if (ds.task, label) not in combos:
                combos.append((ds.task, label))
    for task, algo in combos:
        for et in error_types:
            for measure in measures_of(task):
                sens = [
                    e.sensibility for e in report.entries
                    if e.task == task and e.algorithm == algo and e.error_type == et
                    and e.measure == measure and e.sensibility is not None
                ]
                kps = [
                    e.keeping_point for e in report.entries
                    if e.task == task and e.algorithm == algo and e.error_type == et
                    and e.measure == measure and e.keeping_point is not None
                ]
                report.summaries.append(AlgorithmSummary(
                    task=task, algorithm=algo, error_type=et, measure=measure,
                    mean_sensibility=float(np.mean(sens)) if sens else None,
                    mean_keeping_point=float(np.mean(kps)) if kps else None,
                    n_datasets=len(sens),
                ))
    for task in dict.fromkeys(t for t, _ in combos):
        for et in error_types:
            for measure in measures_of(task):
                ranked = sorted(
                    (
                        (s.algorithm, s.mean_sensibility)
                        for s in report.summaries
                        if s.task == task and s.error_type == et
                        and s.measure == measure and s.mean_sensibility is not None
                    ),
                    key=lambda p: (-p[1], p[0]),
                )
                report.rankings.append({
                    "task": task, "error_type": et, "measure": measure,
                    "most_sensitive_first": [a for a, _ in ranked],
                })


# ---------------------------------------------------------------------------
# guideline engine
# ---------------------------------------------------------------------------

CANDIDATE_THRESHOLDS = {
    "precision": (HIGHER, 0.70),
    "recall": (HIGHER, 0.70),
    "f_measure": (HIGHER, 0.70),
    "rmsd": (LOWER, 1.0),
    "cv_rmsd": (LOWER, 1.0),
    "nrmsd": (LOWER, 0.5),
}

ERROR_PRIORITY = ("missing", "inconsistent", "conflicting")


@dataclass
class Guideline:
    task: str
    detected_rates: dict[str, float]
    priority_measure: str
    dominant_error: str
    candidates: list[tuple[str, float]]
    nearest_misses: list[tuple[str, float]]
    size_preference: str | None
    chosen: str | None
    ranking: list[tuple[str, float]]
    cleaning_targets: dict[str, dict[str, float | None]]
    notes: list[str]

    @property
    def no_acceptable(self) -> bool:
        return self.chosen is None

    def narrative(self) -> str:
        lines = [f"Task: {self.task}"]
        lines.append("Step 1 - detected error rates: " + ", ".join(
            f"{et}={rate:.2%}" for et, rate in self.detected_rates.items()
        ))
        threshold_dir, threshold = CANDIDATE_THRESHOLDS[self.priority_measure]
        comparator = ">" if threshold_dir == HIGHER else "<"
        lines.append(
            f"Step 2 - candidates with clean {self.priority_measure} "
            f"{comparator} {threshold}: "
            + (", ".join(f"{a} ({v:.3f})" for a, v in self.candidates) or "none")
        )
        if not self.candidates:
            lines.append("No acceptable algorithm. Nearest misses: " + ", ".join(
                f"{a} ({v:.3f})" for a, v in self.nearest_misses
            ))
            return "\n".join(lines)
        if self.size_preference:
            lines.append(f"Step 3 - data-size rule prefers: {self.size_preference}")
        else:
            lines.append("Step 3 - data-size rule not applicable")
        lines.append(
            f"Step 4 - sensibility ranking for {self.dominant_error}/"
            f"{self.priority_measure} (least sensitive first): "
            + ", ".join(f"{a} ({v:.4f})" for a, v in self.ranking)
        )
        lines.append(f"Selected algorithm: {self.chosen}")
        lines.append("Step 5 - cleaning targets (clean down to the keeping point):")
        for et, info in self.cleaning_targets.items():
            kp = info["keeping_point"]
            detected = info["detected"]
            target = info["target"]
            if kp is None:
                lines.append(f"  {et}: no keeping point available")
            elif target is None:
                lines.append(
                    f"  {et}: detected {detected:.2%} within keeping point {kp:.2%}; leave as is"
                )
            else:
                lines.append(
                    f"  {et}: detected {detected:.2%} exceeds keeping point {kp:.2%}; "
                    f"clean down to {target:.2%}"
                )
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def recommend(
    report: RobustnessReport,
    task: str,
    detected_rates: dict[str, float],
    data_size: int,
    priority_measure: str | None = None,
    small_threshold: int = 1000,
    large_threshold: int = 10000,
) -> Guideline:
    """Stepwise selection: threshold candidates on clean accuracy, apply the
    data-size preference, pick the least sensitive candidate for the dominant
    error type, then derive per-error-type cleaning targets."""
    if task not in (CLASSIFICATION, CLUSTERING, REGRESSION):
        raise ConfigurationError(f"unknown task {task!r}")
    if priority_measure is None:
        priority_measure = "rmsd" if task == REGRESSION else "f_measure"
    if priority_measure not in measures_of(task):
        raise ConfigurationError(f"measure {priority_measure!r} does not fit task {task!r}")

    algorithms = []
    for s in report.summaries:
        if s.task == task and s.algorithm not in algorithms:
            algorithms.append(s.algorithm)
    if not algorithms:
        raise ConfigurationError(f"report contains no {task} algorithms")

    direction, threshold = CANDIDATE_THRESHOLDS[priority_measure]
    clean_values = {}
    for algo in algorithms:
        value = report.clean_value(task, algo, priority_measure)
        if value is not None:
            clean_values[algo] = value
    candidates = [
        (a, v) for a, v in clean_values.items()
        if (v > threshold if direction == HIGHER else v < threshold)
    ]
    candidates.sort(key=lambda p: (-p[1] if direction == HIGHER else p[1], p[0]))
    misses = sorted(
        ((a, v) for a, v in clean_values.items() if (a, v) not in candidates),
        key=lambda p: (-p[1] if direction == HIGHER else p[1], p[0]),
    )[:3]

    notes: list[str] = []
    dominant = max(
        detected_rates,
        key=lambda et: (detected_rates[et], -ERROR_PRIORITY.index(et)),
    ) if detected_rates else ERROR_PRIORITY[0]

    size_preference = None
    candidate_names = [a for a, _ in candidates]
    if task == CLASSIFICATION and data_size < small_threshold:
        if "logistic_regression" in candidate_names:
            size_preference = "logistic_regression"
        else:
            notes.append("small-data preference (logistic_regression) is not a candidate")
    if task == CLUSTERING and data_size >= large_threshold:
        if "dbscan" in candidate_names:
            size_preference = "dbscan"
        else:
            notes.append("large-data preference (dbscan) is not a candidate")

    ranking = []
    for algo in candidate_names:
        try:
            s = report.summary(algo, dominant, priority_measure)
        except KeyError:
            continue
        if s.mean_sensibility is not None:
            ranking.append((algo, s.mean_sensibility))
    ranking.sort(key=lambda p: (p[1], p[0]))  # least sensitive first

    if size_preference is not None:
        chosen = size_preference
    elif ranking:
        chosen = ranking[0][0]
    elif candidates:
        chosen = candidates[0][0]
        notes.append("no sensibility data for the dominant error type; "
                     "fell back to the best clean score")
    else:
        chosen = None

    cleaning_targets: dict[str, dict[str, float | None]] = {}
    if chosen is not None:
        error_types = dict.fromkeys(
            [s.error_type for s in report.summaries if s.task == task]
        )
        for et in error_types:
            try:
                s = report.summary(chosen, et, priority_measure)
                kp = s.mean_keeping_point
            except KeyError:
                kp = None
            detected = detected_rates.get(et, 0.0)
            target = kp if (kp is not None and detected > kp) else None
            cleaning_targets[et] = {
                "keeping_point": kp, "detected": detected, "target": target,
            }

    return Guideline(
        task=task,
        detected_rates=dict(detected_rates),
        priority_measure=priority_measure,
        dominant_error=dominant,
        candidates=candidates,
        nearest_misses=misses,
        size_preference=size_preference,
        chosen=chosen,
        ranking=ranking,
        cleaning_targets=cleaning_targets,
        notes=notes,
    )
