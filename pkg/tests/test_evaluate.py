import itertools

import numpy as np
import pytest

from dirtybench.classify import KNNClassifier
from dirtybench.cluster import Clustering
from dirtybench.corrupt import CorruptionSpec, derive_seed
from dirtybench.data import CATEGORICAL, Column, NUMERIC, dataset_from_rows
from dirtybench.errors import ConfigurationError, EmptyInputError, ParameterError
from dirtybench.evaluate import (
    Algorithm,
    EvalResult,
    NOISE_LABEL,
    cross_validate,
    evaluate_algorithm,
    evaluate_clustering,
    f_measure,
    fold_partition,
    macro_precision_recall_f,
    match_clusters,
    regression_measures,
    task_of,
)
from dirtybench.synth import make_blobs, make_linear


class TestMacroPRF:
    def test_perfect_predictions(self):
        assert macro_precision_recall_f(["a", "b", "a"], ["a", "b", "a"]) == (1.0, 1.0, 1.0)

    def test_hand_computed_mixed_case(self):
        P, R, F = macro_precision_recall_f(["A", "B", "B"], ["A", "A", "B"])
        assert P == pytest.approx(0.75)
        assert R == pytest.approx(0.75)
        assert F == pytest.approx(0.75)

    def test_single_class_predictions_balanced_truth(self):
        P, R, F = macro_precision_recall_f(["A"] * 4, ["A", "A", "B", "B"])
        assert P == pytest.approx(0.25)
        assert R == pytest.approx(0.5)
        assert F == pytest.approx(f_measure(0.25, 0.5))

    def test_empty_inputs(self):
        with pytest.raises(EmptyInputError):
            macro_precision_recall_f([], [])

    def test_f_zero_when_both_zero(self):
        assert f_measure(0.0, 0.0) == 0.0


class TestMatchClusters:
    def test_permuted_clusters_reach_full_accuracy(self):
        truth = ["a", "a", "b", "b", "c", "c"]
        for perm in itertools.permutations(range(3)):
            assign = np.array([perm[0], perm[0], perm[1], perm[1], perm[2], perm[2]])
            pred = match_clusters(Clustering(assign, 3), truth)
            assert pred == truth

    def test_single_cluster_balanced_truth(self):
        truth = ["a", "b", "a", "b"]
        pred = match_clusters(Clustering(np.zeros(4, dtype=int), 1), truth)
        P, R, F = macro_precision_recall_f(pred, truth)
        assert R == pytest.approx(0.5)

    def test_matches_bruteforce_permutation_score(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            truth = [f"c{v}" for v in rng.integers(0, 3, size=12)]
            assign = rng.integers(0, 3, size=12)
            classes = sorted(set(truth))
            if len(classes) != 3:
                continue
            pred = match_clusters(Clustering(assign.copy(), 3), truth)
            got = sum(p == t for p, t in zip(pred, truth))
            best = max(
                sum(
                    1
                    for a, t in zip(assign, truth)
                    if classes[perm[int(a)]] == t
                )
                for perm in itertools.permutations(range(3))
            )
            assert got == best

    def test_noise_rows_never_match(self):
        truth = ["a", "a", "b"]
        pred = match_clusters(Clustering(np.array([0, -1, 1]), 2), truth)
        assert pred[1] is NOISE_LABEL
        assert pred[1] not in truth


class TestRegressionMeasures:
    def test_perfect_predictions(self):
        m = regression_measures([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert (m.rmsd, m.nrmsd, m.cv_rmsd) == (0.0, 0.0, 0.0)

    def test_constant_offset(self):
        m = regression_measures([4.0, 5.0, 6.0], [1.0, 2.0, 3.0])
        assert m.rmsd == pytest.approx(3.0)

    def test_hand_computed_example(self):
        m = regression_measures([1.0, 3.0], [1.0, 1.0])
        root2 = np.sqrt(2.0)
        assert m.rmsd == pytest.approx(root2, abs=1e-12)
        assert m.nrmsd == pytest.approx(root2 / 2, abs=1e-12)
        assert m.cv_rmsd == pytest.approx(root2 / 2, abs=1e-12)

    def test_undefined_denominators_flagged(self):
        flat = regression_measures([2.0, 2.0], [1.0, 3.0])
        assert flat.nrmsd is None and "nrmsd-undefined" in flat.flags
        zero_mean = regression_measures([-1.0, 1.0], [0.0, 0.0])
        assert zero_mean.cv_rmsd is None and "cv-undefined" in zero_mean.flags

    def test_rmsd_shift_invariant_cv_not(self):
        pred = np.array([1.0, 2.0, 4.0])
        truth = np.array([1.5, 2.5, 3.0])
        base = regression_measures(pred, truth)
        shifted = regression_measures(pred + 5.0, truth + 5.0)
        assert shifted.rmsd == pytest.approx(base.rmsd, abs=1e-12)
        assert shifted.cv_rmsd != pytest.approx(base.cv_rmsd)

    def test_nrmsd_normalizes_by_predicted_range(self):
        pred = [0.0, 10.0]
        truth = [0.0, 2.0]  # truth range 2, predicted range 10
        m = regression_measures(pred, truth)
        assert m.nrmsd == pytest.approx(m.rmsd / 10.0)


class TestFoldPartition:
    def test_disjoint_cover(self):
        rng = np.random.default_rng(0)
        parts = fold_partition(25, 10, rng)
        seen = np.concatenate(parts)
        assert sorted(seen) == list(range(25))
        sizes = sorted(len(p) for p in parts)
        assert max(sizes) - min(sizes) <= 1

    def test_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ParameterError):
            fold_partition(10, 1, rng)
        with pytest.raises(ParameterError):
            fold_partition(3, 5, rng)


class TestCrossValidate:
    def test_rate_zero_equals_manual_folds(self):
        d = make_blobs(24, n_classes=2, seed=1)
        algo = Algorithm("knn", {"k": 1})
        result = cross_validate(d, algo, folds=2, seed=5, timing_repeats=1)
        parts = fold_partition(24, 2, np.random.default_rng(derive_seed(5, "folds")))
        t = d.schema.target_index
        vals = {"precision": [], "recall": []}
        for f, test in enumerate(parts):
            train = np.concatenate([p for g, p in enumerate(parts) if g != f])
            model = KNNClassifier(k=1).fit(d, train)
            pred = model.predict_rows(d, test)
            truth = [d.clean_shadow[i][t] for i in test]
            P, R, F = macro_precision_recall_f(pred, truth)
            vals["precision"].append(P)
            vals["recall"].append(R)
        assert result.measures["precision"] == pytest.approx(np.mean(vals["precision"]))
        assert result.measures["recall"] == pytest.approx(np.mean(vals["recall"]))

    def test_determinism(self):
        d = make_blobs(30, n_classes=2, seed=2)
        spec = CorruptionSpec(error_type="missing", rate=0.2, seed=9)
        algo = Algorithm("decision_tree")
        a = cross_validate(d, algo, spec, folds=3, seed=4, timing_repeats=1)
        b = cross_validate(d, algo, spec, folds=3, seed=4, timing_repeats=1)
        assert a.measures == b.measures
        assert a.fold_values == b.fold_values

    def test_two_fold_partition_sizes_on_four_rows(self):
        cols = [Column("x", NUMERIC), Column("label", CATEGORICAL, "target")]
        d = dataset_from_rows(cols, [[0.0, "a"], [1.0, "a"], [10.0, "b"], [11.0, "b"]])
        result = cross_validate(d, Algorithm("knn", {"k": 1}), folds=2, seed=0,
                                timing_repeats=1)
        assert all(len(v) == 2 for v in result.fold_values.values())

    def test_f_is_harmonic_mean_of_aggregates(self):
        d = make_blobs(40, n_classes=3, seed=3)
        spec = CorruptionSpec(error_type="missing", rate=0.3, seed=1)
        result = cross_validate(d, Algorithm("naive_bayes"), spec, folds=4, seed=2,
                                timing_repeats=1)
        P, R, F = (result.measures[m] for m in ("precision", "recall", "f_measure"))
        assert F == pytest.approx(f_measure(P, R), abs=1e-12)

    def test_regression_path(self):
        d = make_linear(40, seed=4)
        result = cross_validate(d, Algorithm("least_squares"), folds=4, seed=1,
                                timing_repeats=1)
        assert result.measures["rmsd"] is not None
        assert result.measures["rmsd"] < 1.0
        assert result.task == "regression"

    def test_clustering_rejected(self):
        d = make_blobs(20, seed=0)
        with pytest.raises(ConfigurationError):
            cross_validate(d, Algorithm("kmeans"))


class TestEvaluateClustering:
    def test_clean_blobs_score_high(self):
        d = make_blobs(60, n_classes=3, seed=6, spread=0.3)
        result = evaluate_clustering(d, Algorithm("kmeans"), seed=1, timing_repeats=1)
        assert result.measures["precision"] > 0.9
        assert result.task == "clustering"

    def test_dbscan_eps_frozen_from_clean_data(self):
        d = make_blobs(50, n_classes=2, seed=7, spread=0.3)
        spec = CorruptionSpec(error_type="missing", rate=0.3, seed=3)
        result = evaluate_clustering(d, Algorithm("dbscan"), spec, seed=0, timing_repeats=1)
        assert set(result.measures) == {"precision", "recall", "f_measure"}

    def test_determinism(self):
        d = make_blobs(40, n_classes=2, seed=8)
        a = evaluate_clustering(d, Algorithm("cure"), seed=3, timing_repeats=1)
        b = evaluate_clustering(d, Algorithm("cure"), seed=3, timing_repeats=1)
        assert a.measures == b.measures


class TestScriptedAlgorithm:
    def test_lookup_by_rate(self):
        d = make_blobs(10, seed=0)
        algo = Algorithm("scripted", {
            "task": "classification",
            "values": {"precision": {0.0: 0.9, 0.1: 0.7}},
        })
        spec = CorruptionSpec(error_type="missing", rate=0.1, seed=0)
        result = evaluate_algorithm(d, algo, spec, timing_repeats=1)
        assert result.measures["precision"] == pytest.approx(0.7)
        assert task_of(algo) == "classification"

    def test_ledger_row_shape(self):
        d = make_blobs(20, n_classes=2, seed=1)
        result = evaluate_algorithm(d, Algorithm("knn", {"k": 3}), folds=2, seed=0,
                                    timing_repeats=1)
        row = result.ledger_row()
        assert row["dataset"] == d.source
        assert row["algorithm"] == "knn"
        assert row["rmsd"] == ""
