import numpy as np
import pytest

from dirtybench.evaluate import Algorithm
from dirtybench.errors import ConfigurationError, ParameterError
from dirtybench.robustness import (
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
from dirtybench.synth import make_blobs, make_linear

PCT_RATES = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0)

# precision-by-missing-rate traces for five benchmark runs of one tree model
TRACES = {
    "iris": (78.37, 84.16, 78.08, 74.36, 64.99, 58.71),
    "ecoli": (63.47, 62.93, 53.97, 50.93, 48.07, 34.5),
    "car": (81.33, 60.93, 43.7, 42.87, 40.47, 35.47),
    "chess": (82.17, 78.17, 76.53, 75.77, 75.9, 75.57),
    "adult": (80.5, 75.27, 71.3, 72.93, 71.53, 67.23),
}
EXPECTED_SENSIBILITY = {
    "iris": 31.24, "ecoli": 28.97, "car": 45.86, "chess": 6.86, "adult": 16.53,
}
EXPECTED_KEEPING_POINT = {
    "iris": 30.0, "ecoli": 20.0, "car": 0.0, "chess": 50.0, "adult": 40.0,
}


def pct_series(values):
    return MetricSeries(PCT_RATES, tuple(values), direction="higher")


class TestSensibility:
    @pytest.mark.parametrize("name", sorted(TRACES))
    def test_golden_traces(self, name):
        assert sensibility(pct_series(TRACES[name])) == pytest.approx(
            EXPECTED_SENSIBILITY[name], abs=0.005
        )

    def test_five_run_average(self):
        mean = np.mean([sensibility(pct_series(t)) for t in TRACES.values()])
        assert mean == pytest.approx(25.89, abs=0.005)

    def test_constant_series_is_zero(self):
        assert sensibility(pct_series([50.0] * 6)) == 0.0

    def test_needs_two_points(self):
        with pytest.raises(ParameterError):
            sensibility(MetricSeries((0.0,), (1.0,)))

    def test_lower_bounded_by_endpoint_gap(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            values = tuple(rng.uniform(0, 100, size=6))
            s = pct_series(values)
            assert sensibility(s) >= abs(values[0] - values[-1]) - 1e-12
        monotone = pct_series(sorted(rng.uniform(0, 100, size=6), reverse=True))
        assert sensibility(monotone) == pytest.approx(
            abs(monotone.values[0] - monotone.values[-1])
        )

    def test_invariant_under_reversal_and_shift(self):
        rng = np.random.default_rng(1)
        values = tuple(rng.uniform(0, 100, size=6))
        s = sensibility(pct_series(values))
        assert sensibility(pct_series(values[::-1])) == pytest.approx(s)
        assert sensibility(pct_series(tuple(v + 13.5 for v in values))) == pytest.approx(s)


class TestKeepingPoint:
    @pytest.mark.parametrize("name", sorted(TRACES))
    def test_golden_traces_at_k10(self, name):
        assert keeping_point(pct_series(TRACES[name]), k=10.0) == pytest.approx(
            EXPECTED_KEEPING_POINT[name]
        )

    def test_five_run_average(self):
        mean = np.mean([keeping_point(pct_series(t), 10.0) for t in TRACES.values()])
        assert mean == pytest.approx(28.0)

    def test_monotone_in_k(self):
        series = pct_series(TRACES["iris"])
        points = [keeping_point(series, k) for k in (1.0, 5.0, 10.0, 20.0, 100.0)]
        assert points == sorted(points)

    def test_always_on_grid_and_max_at_huge_k(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            series = pct_series(rng.uniform(0, 100, size=6))
            kp = keeping_point(series, k=float(rng.uniform(0.5, 40)))
            assert kp in PCT_RATES
        assert keeping_point(series, k=1e9) == 50.0

    def test_lower_better_direction(self):
        series = MetricSeries(PCT_RATES, (1.0, 1.05, 1.08, 1.3, 1.5, 2.0), direction="lower")
        assert keeping_point(series, k=0.1) == 20.0

    def test_k_validation(self):
        with pytest.raises(ParameterError):
            keeping_point(pct_series(TRACES["iris"]), k=0.0)


class TestMetricSeries:
    def test_requires_uniform_ascending(self):
        with pytest.raises(ParameterError):
            MetricSeries((0.0, 0.1, 0.3), (1.0, 2.0, 3.0))
        with pytest.raises(ParameterError):
            MetricSeries((0.0, 0.2, 0.1), (1.0, 2.0, 3.0))

    def test_rate_grid_rates(self):
        grid = RateGrid(start=0.0, step=0.1, count=5)
        assert grid.rates() == (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
        assert RateGrid(count=0).rates() == (0.0,)

    def test_rate_grid_validation(self):
        with pytest.raises(ParameterError):
            RateGrid(start=0.0, step=0.2, count=10)  # exceeds 1.0
        with pytest.raises(ParameterError):
            RateGrid(count=-1)


def scripted_sweep_algorithm(label, traces_by_measure, task="classification"):
    values = {
        measure: {rate / 100.0: v for rate, v in zip(PCT_RATES, trace)}
        for measure, trace in traces_by_measure.items()
    }
    return Algorithm("scripted", {"task": task, "label": label, "values": values})


class TestRunSweep:
    def fraction_grid(self):
        return RateGrid(start=0.0, step=0.10, count=5)

    def test_scripted_sweep_reproduces_golden_numbers(self):
        # sweep each benchmark trace through a scripted stub, one per dataset
        entries = []
        for name in sorted(TRACES):
            trace = {m: TRACES[name] for m in ("precision", "recall", "f_measure")}
            algo = scripted_sweep_algorithm("tree", trace)
            ds = SweepDataset(name, make_blobs(20, seed=5), "classification")
            report = run_sweep([ds], [algo], ("missing",), self.fraction_grid(),
                               seed=3, k_classification=10.0, timing_repeats=1)
            entries.append(report.entry(name, "tree", "missing", "precision"))
        sens = [e.sensibility for e in entries]
        kps = [e.keeping_point for e in entries]
        assert np.mean(sens) == pytest.approx(25.89, abs=0.005)
        # keeping points on the fraction grid: 0.30/0.20/0.0/0.50/0.40
        assert np.mean(kps) == pytest.approx(0.28, abs=1e-9)

    def test_single_dataset_summary_values(self):
        report = run_sweep(
            [SweepDataset("iris", make_blobs(20, seed=5), "classification")],
            [scripted_sweep_algorithm("tree", {m: TRACES["iris"] for m in
                                               ("precision", "recall", "f_measure")})],
            ("missing",), self.fraction_grid(), seed=1,
            k_classification=10.0, timing_repeats=1,
        )
        s = report.summary("tree", "missing", "precision")
        assert s.mean_sensibility == pytest.approx(31.24, abs=0.005)
        assert s.mean_keeping_point == pytest.approx(0.30)

    def test_degenerate_grid_flags(self):
        ds = SweepDataset("blobs", make_blobs(20, n_classes=2, seed=1), "classification")
        report = run_sweep([ds], [Algorithm("knn", {"k": 1})], ("missing",),
                           RateGrid(count=0), seed=0, folds=2, timing_repeats=1)
        entry = report.entry("blobs", "knn", "missing", "precision")
        assert entry.sensibility is None
        assert "degenerate-grid" in entry.flags

    def test_determinism_and_real_degradation(self):
        ds = SweepDataset("blobs", make_blobs(40, n_classes=2, seed=2), "classification")
        grid = RateGrid(start=0.0, step=0.25, count=2)
        kwargs = dict(error_types=("missing",), grid=grid, seed=7, folds=4,
                      timing_repeats=1)
        r1 = run_sweep([ds], [Algorithm("decision_tree")], **kwargs)
        r2 = run_sweep([ds], [Algorithm("decision_tree")], **kwargs)
        e1 = r1.entry("blobs", "decision_tree", "missing", "f_measure")
        e2 = r2.entry("blobs", "decision_tree", "missing", "f_measure")
        assert e1.series.values == e2.series.values

    def test_failed_combination_recorded_not_fatal(self):
        ds = SweepDataset("blobs3", make_blobs(30, n_classes=3, seed=3), "classification")
        report = run_sweep(
            [ds],
            [Algorithm("logistic_regression"), Algorithm("knn", {"k": 1})],
            ("missing",), RateGrid(start=0.0, step=0.5, count=1),
            seed=0, folds=3, timing_repeats=1,
        )
        assert report.errors  # logistic cannot do 3 classes
        entry = report.entry("blobs3", "logistic_regression", "missing", "precision")
        assert entry.sensibility is None and "incomplete-series" in entry.flags
        assert report.entry("blobs3", "knn", "missing", "precision").sensibility is not None

    def test_grid_must_start_at_zero(self):
        ds = SweepDataset("blobs", make_blobs(20, seed=0), "classification")
        with pytest.raises(ConfigurationError):
            run_sweep([ds], [Algorithm("knn")], ("missing",),
                      RateGrid(start=0.1, step=0.1, count=2))

    def test_regression_sweep_produces_lower_better_series(self):
        ds = SweepDataset("lin", make_linear(60, seed=4), "regression")
        report = run_sweep([ds], [Algorithm("least_squares")], ("missing",),
                           RateGrid(start=0.0, step=0.25, count=2), seed=2,
                           folds=3, timing_repeats=1)
        entry = report.entry("lin", "least_squares", "missing", "rmsd")
        assert entry.series.direction == "lower"

    def test_report_json_round_trip(self):
        ds = SweepDataset("blobs", make_blobs(24, n_classes=2, seed=6), "classification")
        report = run_sweep([ds], [Algorithm("knn", {"k": 1})], ("missing",),
                           RateGrid(start=0.0, step=0.25, count=2), seed=1,
                           folds=3, timing_repeats=1)
        back = RobustnessReport.from_json_dict(report.to_json_dict())
        e0 = report.entry("blobs", "knn", "missing", "precision")
        e1 = back.entry("blobs", "knn", "missing", "precision")
        assert e0.series.values == e1.series.values
        assert e0.sensibility == e1.sensibility

    def test_parallel_jobs_match_serial(self):
        ds = SweepDataset("blobs", make_blobs(24, n_classes=2, seed=6), "classification")
        args = ([ds], [Algorithm("knn", {"k": 1}), Algorithm("decision_tree")],
                ("missing",), RateGrid(start=0.0, step=0.25, count=2))
        kwargs = dict(seed=1, folds=3, timing_repeats=1)
        serial = run_sweep(*args, **kwargs, jobs=1)
        parallel = run_sweep(*args, **kwargs, jobs=2)
        for e_s, e_p in zip(serial.entries, parallel.entries):
            assert e_s.series.values == e_p.series.values


def scripted_report(sens_by_algo, clean_by_algo, keeping_by_algo=None, task="classification"):
    """Build a minimal report by sweeping scripted algorithms."""
    grid = RateGrid(start=0.0, step=0.10, count=5)
    algorithms = []
    for algo, clean in clean_by_algo.items():
        total = sens_by_algo[algo]
        # fabricate a monotone trace with the requested total variation
        drop = total / 5.0
        trace = tuple(clean - i * drop for i in range(6))
        if keeping_by_algo and algo in keeping_by_algo:
            kp = keeping_by_algo[algo]
            k = 0.10 if task != "regression" else 0.1
            trace = list(trace)
            for i, rate in enumerate(grid.rates()):
                if rate > kp:
                    trace[i] = clean - 2.0 * k - i * drop
            trace = tuple(trace)
        measures = ("rmsd", "nrmsd", "cv_rmsd") if task == "regression" else (
            "precision", "recall", "f_measure")
        algorithms.append(scripted_sweep_algorithm(
            algo, {m: trace for m in measures}, task=task))
    ds = SweepDataset("synthetic", make_blobs(20, seed=9), task)
    return run_sweep([ds], algorithms, ("missing", "inconsistent", "conflicting"),
                     grid, seed=0, timing_repeats=1)


class TestRecommend:
    def test_argmin_sensibility_rule(self):
        report = scripted_report(
            sens_by_algo={"alg_a": 0.05, "alg_b": 0.30},
            clean_by_algo={"alg_a": 0.85, "alg_b": 0.92},
        )
        guide = recommend(report, "classification", {"missing": 0.4}, data_size=5000)
        assert guide.chosen == "alg_a"
        assert guide.dominant_error == "missing"

    def test_empty_candidates_reports_misses(self):
        report = scripted_report(
            sens_by_algo={"alg_a": 0.05, "alg_b": 0.30},
            clean_by_algo={"alg_a": 0.55, "alg_b": 0.60},
        )
        guide = recommend(report, "classification", {"missing": 0.2}, data_size=5000)
        assert guide.no_acceptable
        assert guide.nearest_misses[0][0] == "alg_b"
        assert "No acceptable algorithm" in guide.narrative()

    def test_cleaning_targets_rule(self):
        report = scripted_report(
            sens_by_algo={"alg_a": 0.02},
            clean_by_algo={"alg_a": 0.9},
            keeping_by_algo={"alg_a": 0.30},
        )
        guide = recommend(
            report, "classification",
            {"missing": 0.4, "inconsistent": 0.1, "conflicting": 0.6},
            data_size=5000,
        )
        targets = guide.cleaning_targets
        kp = targets["missing"]["keeping_point"]
        assert targets["missing"]["target"] == pytest.approx(kp)
        assert targets["inconsistent"]["target"] is None

    def test_dominant_error_tie_break(self):
        report = scripted_report(
            sens_by_algo={"alg_a": 0.05},
            clean_by_algo={"alg_a": 0.9},
        )
        guide = recommend(report, "classification",
                          {"missing": 0.3, "inconsistent": 0.3}, data_size=100)
        assert guide.dominant_error == "missing"

    def test_scaling_invariance_of_choice(self):
        base = scripted_report(
            sens_by_algo={"alg_a": 0.04, "alg_b": 0.12, "alg_c": 0.4},
            clean_by_algo={"alg_a": 0.8, "alg_b": 0.9, "alg_c": 0.85},
        )
        scaled = scripted_report(
            sens_by_algo={"alg_a": 0.08, "alg_b": 0.24, "alg_c": 0.8},
            clean_by_algo={"alg_a": 0.8, "alg_b": 0.9, "alg_c": 0.85},
        )
        g1 = recommend(base, "classification", {"missing": 0.2}, data_size=5000)
        g2 = recommend(scaled, "classification", {"missing": 0.2}, data_size=5000)
        assert g1.chosen == g2.chosen
