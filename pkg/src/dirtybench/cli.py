"""Command-line front door: inject, sweep, recommend, validate-config.

Exit codes: 0 success, 2 configuration error, 3 partial sweep failure,
4 I/O error.  Every emitted artifact embeds the config hash and root seed so
a run can be reproduced from its own outputs.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .config import RunConfig
from .corrupt import CONFLICTING, CorruptionSpec, INCONSISTENT, MISSING, derive_seed, inject
from .data import dataset_to_text, detect_error_rates
from .errors import DirtyBenchError
from .evaluate import LEDGER_COLUMNS
from .robustness import RobustnessReport, recommend, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3
EXIT_IO = 4


def _stamp(config_hash: str, seed: int) -> str:
    return f"# config_hash={config_hash} seed={seed}\n"


def _write_csv(path: Path, header, rows, stamp: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(stamp)
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "output_dir", None) is not None:
        config.output_dir = args.output_dir
    if getattr(args, "jobs", None) is not None:
        config.jobs = args.jobs
    return config


def cmd_validate_config(args) -> int:
    config = RunConfig.load_file(args.config)
    config = _apply_overrides(config, args)
    print("\n".join(config.plan_lines()))
    print("config OK")
    return EXIT_OK


def cmd_inject(args) -> int:
    config = RunConfig.load_file(args.config)
    config = _apply_overrides(config, args)
    if args.dry_run:
        print("\n".join(config.plan_lines()))
        return EXIT_OK
    out_dir = Path(config.output_dir) / "injected"
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(config.config_hash, config.seed)
    summary_rows = []
    for ds in config.load_sweep_datasets():
        entry = next(d for d in config.datasets if d.name == ds.name)
        for error_type in config.error_types:
            for rate in config.rate_grid.rates():
                spec = CorruptionSpec(
                    error_type=error_type,
                    rate=rate,
                    seed=derive_seed(config.seed, ds.name, error_type, rate),
                    column_mask=ds.column_mask,
                    corrupt_target_in_train=ds.corrupt_target_in_train,
                    rules=ds.rules if error_type == INCONSISTENT else (),
                    entity_key=ds.entity_key if error_type == CONFLICTING else (),
                )
                corrupted = inject(ds.dataset, spec)
                name = f"{ds.name}__{error_type}__{int(round(rate * 100)):03d}.csv"
                target = out_dir / name
                target.write_text(
                    dataset_to_text(corrupted, delimiter=entry.delimiter),
                    encoding="utf-8",
                )
                rates = detect_error_rates(
                    corrupted,
                    rules=ds.rules or None,
                    entity_key=ds.entity_key or None,
                )
                if error_type == MISSING:
                    changed = sum(
                        1 for row in corrupted.rows for cell in row if cell is None
                    )
                    achieved = rates.missing
                    unit = "cells"
                else:
                    achieved = getattr(rates, error_type)
                    changed = int(round(achieved * len(corrupted.rows)))
                    unit = "rows"
                summary_rows.append([
                    ds.name, error_type, rate, round(achieved, 6),
                    changed, unit, len(corrupted.rows), name,
                ])
    _write_csv(
        Path(config.output_dir) / "injection_summary.csv",
        ["dataset", "error_type", "target_rate", "achieved_rate",
         "changed", "unit", "rows", "file"],
        summary_rows, stamp,
    )
    print(f"wrote {len(summary_rows)} corrupted datasets under {out_dir}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = RunConfig.load_file(args.config)
    config = _apply_overrides(config, args)
    if args.dry_run:
        print("\n".join(config.plan_lines()))
        return EXIT_OK
    datasets = config.load_sweep_datasets()
    report = run_sweep(
        datasets,
        config.algorithms,
        error_types=config.error_types,
        grid=config.rate_grid,
        seed=config.seed,
        k_classification=config.k_classification,
        k_regression=config.k_regression,
        folds=config.folds,
        timing_repeats=config.timing_repeats,
        jobs=config.resolved_jobs(),
    )
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(config.config_hash, config.seed)

    ledger_rows = []
    for result in report.results:
        row = result.ledger_row()
        ledger_rows.append([row[c] for c in LEDGER_COLUMNS])
    _write_csv(out_dir / "results.csv", LEDGER_COLUMNS, ledger_rows, stamp)

    tasks_present = []
    for ds in datasets:
        if ds.task not in tasks_present:
            tasks_present.append(ds.task)
    for task in tasks_present:
        for metric in ("sensibility", "keeping_point"):
            header, rows = report.metric_table(task, metric)
            _write_csv(out_dir / f"{metric}_{task}.csv", header, rows, stamp)

    plots = out_dir / "plots"
    for entry in report.entries:
        if entry.series is None:
            continue
        name = "__".join([entry.dataset, entry.algorithm, entry.error_type, entry.measure])
        _write_csv(
            plots / f"{name}.csv", ["rate", "value"],
            list(zip(entry.series.rates, entry.series.values)), stamp,
        )

    payload = {"config_hash": config.config_hash, "root_seed": config.seed}
    payload.update(report.to_json_dict())
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8"
    )
    (out_dir / "resolved_config.json").write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )

    if report.errors:
        print(f"sweep finished with {len(report.errors)} failed combinations:",
              file=sys.stderr)
        for err in report.errors:
            print(f"  {err['dataset']} / {err['algorithm']} / {err['error_type']} "
                  f"@ {err['rate']}: {err['message']}", file=sys.stderr)
        return EXIT_PARTIAL
    print(f"sweep complete: {len(report.results)} results under {out_dir}")
    return EXIT_OK


def cmd_recommend(args) -> int:
    data = json.loads(Path(args.report).read_text(encoding="utf-8"))
    report = RobustnessReport.from_json_dict(data)
    detected = {}
    for et, value in (
        ("missing", args.missing_rate),
        ("inconsistent", args.inconsistent_rate),
        ("conflicting", args.conflicting_rate),
    ):
        if value is not None:
            detected[et] = value
    guide = recommend(
        report,
        task=args.task,
        detected_rates=detected,
        data_size=args.data_size,
        priority_measure=args.measure,
        small_threshold=args.small_threshold,
        large_threshold=args.large_threshold,
    )
    text = guide.narrative()
    print(text)
    if args.output:
        payload = {
            "config_hash": data.get("config_hash", ""),
            "root_seed": data.get("root_seed", report.seed),
            "task": guide.task,
            "detected_rates": guide.detected_rates,
            "priority_measure": guide.priority_measure,
            "dominant_error": guide.dominant_error,
            "candidates": guide.candidates,
            "nearest_misses": guide.nearest_misses,
            "size_preference": guide.size_preference,
            "chosen": guide.chosen,
            "ranking": guide.ranking,
            "cleaning_targets": guide.cleaning_targets,
            "notes": guide.notes,
            "narrative": text,
        }
        Path(args.output).write_text(
            json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirtybench",
        description="Measure how missing, inconsistent, and conflicting data "
                    "degrade classical learning algorithms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="path to the JSON run configuration")
    common.add_argument("--seed", type=int, help="override the root seed")
    common.add_argument("--output-dir", help="override the output directory")
    common.add_argument("--jobs", type=int, help="worker processes for the sweep")
    common.add_argument("--dry-run", action="store_true",
                        help="print the resolved plan and exit")

    sub.add_parser("validate-config", parents=[common],
                   help="check a config file and print the resolved plan")
    sub.add_parser("inject", parents=[common],
                   help="write corrupted dataset copies and an achieved-rate summary")
    sub.add_parser("sweep", parents=[common],
                   help="run the full robustness sweep and emit reports")

    rec = sub.add_parser("recommend", help="derive algorithm-selection guidance "
                                           "from a sweep report")
    rec.add_argument("--report", required=True, help="report.json from a sweep")
    rec.add_argument("--task", required=True,
                     choices=["classification", "clustering", "regression"])
    rec.add_argument("--data-size", type=int, required=True,
                     help="row count of the data the guidance is for")
    rec.add_argument("--missing-rate", type=float)
    rec.add_argument("--inconsistent-rate", type=float)
    rec.add_argument("--conflicting-rate", type=float)
    rec.add_argument("--measure", help="priority measure (default: f_measure or rmsd)")
    rec.add_argument("--small-threshold", type=int, default=1000)
    rec.add_argument("--large-threshold", type=int, default=10000)
    rec.add_argument("--output", help="also write the guidance as JSON here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "validate-config": cmd_validate_config,
        "inject": cmd_inject,
        "sweep": cmd_sweep,
        "recommend": cmd_recommend,
    }
    try:
        return handlers[args.command](args)
    except DirtyBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
