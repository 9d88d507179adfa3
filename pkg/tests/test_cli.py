import json
import shutil
from pathlib import Path

import pytest

from dirtybench import cli
from dirtybench.data import dataset_to_text, load_dataset

PCT_RATES = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0)
IRIS_TRACE = (78.37, 84.16, 78.08, 74.36, 64.99, 58.71)


def grid_csv(path: Path, n_rows=10, n_cols=4):
    header = ",".join(f"x{j}" for j in range(n_cols))
    lines = [header]
    for i in range(n_rows):
        lines.append(",".join(str(float(i * n_cols + j)) for j in range(n_cols)))
    path.write_text("\n".join(lines) + "\n")
    return path


def scripted_config(tmp_path, data_path, grid=None, k=10.0):
    values = {
        measure: {str(rate / 100.0): v for rate, v in zip(PCT_RATES, IRIS_TRACE)}
        for measure in ("precision", "recall", "f_measure")
    }
    config = {
        "seed": 11,
        "output_dir": str(tmp_path / "out"),
        "rate_grid": grid or {"start": 0.0, "step": 0.10, "count": 5},
        "error_types": ["missing"],
        "folds": 2,
        "timing_repeats": 1,
        "k_classification": k,
        "datasets": [{
            "name": "flowers",
            "path": str(data_path),
            "task": "classification",
            "target": "species",
        }],
        "algorithms": [{"name": "scripted",
                        "params": {"task": "classification", "label": "tree",
                                   "values": values}}],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


@pytest.fixture()
def iris_copy(tmp_path, iris_path):
    dest = tmp_path / "iris.csv"
    shutil.copy(iris_path, dest)
    return dest


class TestValidateConfig:
    def test_valid_config_prints_plan(self, tmp_path, iris_copy, capsys):
        config = scripted_config(tmp_path, iris_copy)
        assert cli.main(["validate-config", str(config)]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "config OK" in out
        assert "flowers" in out

    def test_unknown_key_rejected(self, tmp_path, iris_copy, capsys):
        config = scripted_config(tmp_path, iris_copy)
        data = json.loads(config.read_text())
        data["surprise"] = 1
        config.write_text(json.dumps(data))
        assert cli.main(["validate-config", str(config)]) == cli.EXIT_CONFIG
        assert "surprise" in capsys.readouterr().err

    def test_empty_algorithms_rejected_before_compute(self, tmp_path, iris_copy):
        config = scripted_config(tmp_path, iris_copy)
        data = json.loads(config.read_text())
        data["algorithms"] = []
        config.write_text(json.dumps(data))
        assert cli.main(["sweep", str(config)]) == cli.EXIT_CONFIG

    def test_missing_file_is_io_error(self, tmp_path):
        assert cli.main(["validate-config", str(tmp_path / "nope.json")]) == cli.EXIT_IO


class TestInject:
    def test_rate_zero_output_equals_canonical_input(self, tmp_path):
        data = grid_csv(tmp_path / "grid.csv")
        config = {
            "seed": 3,
            "output_dir": str(tmp_path / "out"),
            "rate_grid": {"start": 0.0, "step": 0.1, "count": 0},
            "error_types": ["missing"],
            "datasets": [{"name": "grid", "path": str(data), "task": "clustering"}],
            "algorithms": ["kmeans"],
        }
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(config))
        assert cli.main(["inject", str(cfg)]) == cli.EXIT_OK
        emitted = tmp_path / "out" / "injected" / "grid__missing__000.csv"
        canonical = dataset_to_text(load_dataset(data))
        assert emitted.read_text() == canonical

    def test_missing_quarter_on_10x4_reports_10_cells(self, tmp_path):
        data = grid_csv(tmp_path / "grid.csv", 10, 4)
        config = {
            "seed": 5,
            "output_dir": str(tmp_path / "out"),
            "rate_grid": {"start": 0.25, "step": 0.1, "count": 0},
            "error_types": ["missing"],
            "datasets": [{"name": "grid", "path": str(data), "task": "clustering"}],
            "algorithms": ["kmeans"],
        }
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(config))
        assert cli.main(["inject", str(cfg)]) == cli.EXIT_OK
        summary = (tmp_path / "out" / "injection_summary.csv").read_text().splitlines()
        assert summary[0].startswith("# config_hash=")
        row = summary[2].split(",")
        assert row[0] == "grid" and row[4] == "10" and row[5] == "cells"

    def test_rerun_byte_identical(self, tmp_path):
        data = grid_csv(tmp_path / "grid.csv")
        config = {
            "seed": 7,
            "output_dir": str(tmp_path / "out"),
            "rate_grid": {"start": 0.0, "step": 0.25, "count": 2},
            "error_types": ["missing"],
            "datasets": [{"name": "grid", "path": str(data), "task": "clustering"}],
            "algorithms": ["kmeans"],
        }
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(config))
        assert cli.main(["inject", str(cfg)]) == cli.EXIT_OK
        first = {
            p.name: p.read_bytes()
            for p in (tmp_path / "out" / "injected").iterdir()
        }
        assert cli.main(["inject", str(cfg)]) == cli.EXIT_OK
        second = {
            p.name: p.read_bytes()
            for p in (tmp_path / "out" / "injected").iterdir()
        }
        assert first == second

    def test_column_mask_restricts_injection(self, tmp_path):
        data = grid_csv(tmp_path / "grid.csv", 10, 4)
        config = {
            "output_dir": str(tmp_path / "out"),
            "rate_grid": {"start": 0.5, "step": 0.1, "count": 0},
            "error_types": ["missing"],
            "datasets": [{"name": "grid", "path": str(data), "task": "clustering",
                          "column_mask": ["x0", "x1"]}],
            "algorithms": ["kmeans"],
        }
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(config))
        assert cli.main(["inject", str(cfg)]) == cli.EXIT_OK
        emitted = tmp_path / "out" / "injected" / "grid__missing__050.csv"
        d = load_dataset(emitted)
        for row in d.rows:
            assert row[2] is not None and row[3] is not None
        holes = sum(1 for row in d.rows for c in row[:2] if c is None)
        assert holes == 10  # half of the 20 masked cells

    def test_input_files_never_mutated(self, tmp_path):
        data = grid_csv(tmp_path / "grid.csv")
        before = data.read_bytes()
        config = {
            "output_dir": str(tmp_path / "out"),
            "rate_grid": {"start": 0.5, "step": 0.1, "count": 0},
            "error_types": ["missing"],
            "datasets": [{"name": "grid", "path": str(data), "task": "clustering"}],
            "algorithms": ["kmeans"],
        }
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(config))
        cli.main(["inject", str(cfg)])
        assert data.read_bytes() == before


class TestSweep:
    def test_scripted_sweep_reproduces_golden_numbers(self, tmp_path, iris_copy):
        config = scripted_config(tmp_path, iris_copy)
        assert cli.main(["sweep", str(config)]) == cli.EXIT_OK
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        entry = next(
            e for e in report["entries"]
            if e["algorithm"] == "tree" and e["measure"] == "precision"
        )
        assert entry["sensibility"] == pytest.approx(31.24, abs=0.005)
        assert entry["keeping_point"] == pytest.approx(0.30)
        assert report["config_hash"]
        assert (tmp_path / "out" / "sensibility_classification.csv").exists()
        assert (tmp_path / "out" / "keeping_point_classification.csv").exists()
        plot = tmp_path / "out" / "plots" / "flowers__tree__missing__precision.csv"
        assert plot.exists()

    def test_same_seed_identical_ledgers(self, tmp_path, iris_copy):
        config = scripted_config(tmp_path, iris_copy)
        assert cli.main(["sweep", str(config)]) == cli.EXIT_OK
        first = (tmp_path / "out" / "results.csv").read_bytes()
        assert cli.main(["sweep", str(config)]) == cli.EXIT_OK
        assert (tmp_path / "out" / "results.csv").read_bytes() == first

    def test_resolved_config_reproduces_run(self, tmp_path, iris_copy):
        config = scripted_config(tmp_path, iris_copy)
        assert cli.main(["sweep", str(config)]) == cli.EXIT_OK
        first = (tmp_path / "out" / "results.csv").read_bytes()
        resolved = tmp_path / "out" / "resolved_config.json"
        data = json.loads(resolved.read_text())
        data["output_dir"] = str(tmp_path / "out2")
        rerun = tmp_path / "rerun.json"
        rerun.write_text(json.dumps(data))
        assert cli.main(["sweep", str(rerun)]) == cli.EXIT_OK
        second = (tmp_path / "out2" / "results.csv").read_bytes()
        # stamp differs only by config hash (output_dir changed); compare bodies
        assert first.split(b"\n", 1)[1] == second.split(b"\n", 1)[1]

    def test_partial_failure_exit_code(self, tmp_path, iris_copy, capsys):
        config = scripted_config(tmp_path, iris_copy)
        data = json.loads(config.read_text())
        # logistic regression cannot handle the 3-class iris target
        data["algorithms"] = [{"name": "logistic_regression", "params": {}}]
        data["rate_grid"] = {"start": 0.0, "step": 0.5, "count": 1}
        config.write_text(json.dumps(data))
        assert cli.main(["sweep", str(config)]) == cli.EXIT_PARTIAL
        assert "failed combinations" in capsys.readouterr().err

    def test_dry_run_produces_no_output(self, tmp_path, iris_copy, capsys):
        config = scripted_config(tmp_path, iris_copy)
        assert cli.main(["sweep", str(config), "--dry-run"]) == cli.EXIT_OK
        assert not (tmp_path / "out").exists()
        assert "combinations" in capsys.readouterr().out


class TestRecommend:
    def test_guideline_from_report(self, tmp_path, iris_copy, capsys):
        config = scripted_config(tmp_path, iris_copy)
        assert cli.main(["sweep", str(config)]) == cli.EXIT_OK
        out_json = tmp_path / "guide.json"
        code = cli.main([
            "recommend",
            "--report", str(tmp_path / "out" / "report.json"),
            "--task", "classification",
            "--data-size", "5000",
            "--missing-rate", "0.4",
            "--output", str(out_json),
        ])
        assert code == cli.EXIT_OK
        text = capsys.readouterr().out
        assert "Selected algorithm: tree" in text
        payload = json.loads(out_json.read_text())
        assert payload["chosen"] == "tree"
        assert payload["dominant_error"] == "missing"
