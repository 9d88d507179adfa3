"""Deterministic synthetic datasets for tests, demos, and desk-scale sweeps."""
from __future__ import annotations

import numpy as np

from .data import CATEGORICAL, Column, Dataset, FDRule, KEY, NUMERIC, TARGET, dataset_from_rows


def make_blobs(
    n_rows: int = 150,
    n_features: int = 4,
    n_classes: int = 3,
    spread: float = 0.6,
    seed: int = 0,
) -> Dataset:
    """Gaussian class blobs with centers spaced along the diagonal."""
    rng = np.random.default_rng(seed)
    cols = [Column(f"x{j}", NUMERIC) for j in range(n_features)]
    cols.append(Column("label", CATEGORICAL, TARGET))
    rows = []
    for i in range(n_rows):
        c = i % n_classes
        center = 3.0 * c
        feats = center + spread * rng.standard_normal(n_features)
        rows.append([round(float(v), 6) for v in feats] + [f"class{c}"])
    return dataset_from_rows(cols, rows, source=f"<blobs:{n_rows}x{n_features}>")


def make_linear(
    n_rows: int = 200,
    n_features: int = 3,
    noise: float = 0.5,
    seed: int = 0,
    coefficients: tuple[float, ...] | None = None,
    intercept: float = 1.0,
) -> Dataset:
    """Regression rows drawn from a noisy linear model."""
    rng = np.random.default_rng(seed)
    if coefficients is None:
        coefficients = tuple(float(k + 1) for k in range(n_features))
    cols = [Column(f"x{j}", NUMERIC) for j in range(n_features)]
    cols.append(Column("y", NUMERIC, TARGET))
    X = rng.uniform(-2.0, 2.0, size=(n_rows, n_features))
    y = X @ np.asarray(coefficients) + intercept + noise * rng.standard_normal(n_rows)
    rows = [
        [round(float(v), 6) for v in X[i]] + [round(float(y[i]), 6)]
        for i in range(n_rows)
    ]
    return dataset_from_rows(cols, rows, source=f"<linear:{n_rows}x{n_features}>")


def make_keyed_records(n_rows: int = 1000, seed: int = 0) -> Dataset:
    """Entity-keyed records for corruption accuracy studies.

    Every entity id covers two rows, each row carries a unique ``code`` whose
    functional dependency ``code -> dept`` holds on the clean data, and three
    numeric measurements serve as missing/conflict targets.
    """
    if n_rows % 2:
        raise ValueError("n_rows must be even (two rows per entity)")
    rng = np.random.default_rng(seed)
    cols = [
        Column("entity", CATEGORICAL, KEY),
        Column("code", CATEGORICAL),
        Column("dept", CATEGORICAL),
        Column("city", CATEGORICAL),
        Column("m1", NUMERIC),
        Column("m2", NUMERIC),
        Column("m3", NUMERIC),
    ]
    cities = ["NYC", "LA", "SF", "CHI", "BOS"]
    rows = []
    for e in range(n_rows // 2):
        # the two records of an entity agree everywhere, so the clean
        # baseline is conflict-free and FD-consistent
        shared = [
            f"e{e:04d}",
            f"c{e:04d}",
            f"d{e % 7}",
            cities[e % len(cities)],
        ] + [round(float(v), 4) for v in rng.uniform(0.0, 100.0, size=3)]
        rows.append(list(shared))
        rows.append(list(shared))
    rule = FDRule(lhs=("code",), rhs="dept")
    return dataset_from_rows(cols, rows, rules=[rule], source=f"<keyed:{n_rows}>")
