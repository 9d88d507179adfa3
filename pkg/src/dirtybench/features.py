"""Shared feature encoding for distance-based and numeric algorithms.

Numeric features are min-max scaled to [0, 1] on the fitting rows.
Categorical features become one-hot blocks scaled by 1/sqrt(2), which makes
the squared Euclidean distance between two records equal to the scaled
numeric terms plus an overlap term (0 if equal, 1 otherwise) per categorical
column.  Encoders must be fitted on imputed rows; a missing cell raises.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .data import Cell, Dataset, NUMERIC
from .errors import SchemaError

CAT_SCALE = 1.0 / math.sqrt(2.0)


def _check_present(value: Cell, col_name: str) -> Cell:
    if value is None:
        raise SchemaError(f"missing cell in column {col_name!r}; impute before encoding")
    return value


class FeatureEncoder:
    """Min-max + scaled one-hot embedding of the feature columns."""

    def __init__(self, dataset: Dataset, rows: Sequence[int] | None = None):
        self.schema = dataset.schema
        idx = range(dataset.n_rows) if rows is None else rows
        self.numeric_cols: list[int] = []
        self.categorical_cols: list[int] = []
        for j in self.schema.feature_indices:
            if self.schema.columns[j].kind == NUMERIC:
                self.numeric_cols.append(j)
            else:
                self.categorical_cols.append(j)
        self.lo: dict[int, float] = {}
        self.hi: dict[int, float] = {}
        for j in self.numeric_cols:
            vals = [
                _check_present(dataset.rows[i][j], self.schema.columns[j].name)
                for i in idx
            ]
            self.lo[j] = min(vals)
            self.hi[j] = max(vals)
        self.vocab: dict[int, dict[str, int]] = {}
        for j in self.categorical_cols:
            seen: dict[str, int] = {}
            for i in idx:
                v = _check_present(dataset.rows[i][j], self.schema.columns[j].name)
                if v not in seen:
                    seen[v] = len(seen)
            self.vocab[j] = seen
        self.width = len(self.numeric_cols) + sum(len(v) for v in self.vocab.values())

    def transform_rows(self, dataset: Dataset, rows: Sequence[int] | None = None) -> np.ndarray:
        idx = list(range(dataset.n_rows)) if rows is None else list(rows)
        return np.array([self.transform_cells(dataset.rows[i]) for i in idx])

    def transform_cells(self, cells: Sequence[Cell]) -> np.ndarray:
        out = np.zeros(self.width)
        pos = 0
        for j in self.numeric_cols:
            v = _check_present(cells[j], self.schema.columns[j].name)
            span = self.hi[j] - self.lo[j]
            out[pos] = (float(v) - self.lo[j]) / span if span > 0 else 0.0
            pos += 1
        for j in self.categorical_cols:
            v = _check_present(cells[j], self.schema.columns[j].name)
            slot = self.vocab[j].get(v)
            if slot is not None:  # unseen categories embed as an all-zero block
                out[pos + slot] = CAT_SCALE
            pos += len(self.vocab[j])
        return out

    def inverse_numeric(self, point: np.ndarray) -> np.ndarray:
        """Map an encoded point back to raw units; numeric-only schemas."""
        if self.categorical_cols:
            raise SchemaError("inverse transform defined only for all-numeric features")
        raw = np.empty(len(self.numeric_cols))
        for pos, j in enumerate(self.numeric_cols):
            span = self.hi[j] - self.lo[j]
            raw[pos] = point[pos] * span + self.lo[j] if span > 0 else self.lo[j]
        return raw


class Discretizer:
    """Equal-width binning of numeric features plus categorical code maps.

    Produces the integer code matrix that the probabilistic classifiers
    condition on; bin edges and vocabularies are fitted on the training rows.
    """

    def __init__(self, dataset: Dataset, rows: Sequence[int] | None = None, n_bins: int = 10):
        self.schema = dataset.schema
        self.n_bins = n_bins
        idx = list(range(dataset.n_rows)) if rows is None else list(rows)
        self.feature_cols = list(self.schema.feature_indices)
        self.lo: dict[int, float] = {}
        self.hi: dict[int, float] = {}
        self.vocab: dict[int, dict[str, int]] = {}
        self.cardinalities: list[int] = []
        for j in self.feature_cols:
            col = self.schema.columns[j]
            if col.kind == NUMERIC:
                vals = [float(_check_present(dataset.rows[i][j], col.name)) for i in idx]
                self.lo[j] = min(vals)
                self.hi[j] = max(vals)
                self.cardinalities.append(n_bins)
            else:
                seen: dict[str, int] = {}
                for i in idx:
                    v = _check_present(dataset.rows[i][j], col.name)
                    if v not in seen:
                        seen[v] = len(seen)
                self.vocab[j] = seen
                # reserve one extra code for unseen categories at predict time
                self.cardinalities.append(len(seen) + 1)

    def codes_rows(self, dataset: Dataset, rows: Sequence[int] | None = None) -> np.ndarray:
        idx = list(range(dataset.n_rows)) if rows is None else list(rows)
        return np.array([self.codes_cells(dataset.rows[i]) for i in idx], dtype=np.int64)

    def codes_cells(self, cells: Sequence[Cell]) -> np.ndarray:
        out = np.empty(len(self.feature_cols), dtype=np.int64)
        for pos, j in enumerate(self.feature_cols):
            col = self.schema.columns[j]
            v = _check_present(cells[j], col.name)
            if col.kind == NUMERIC:
                span = self.hi[j] - self.lo[j]
                if span <= 0:
                    out[pos] = 0
                else:
                    b = int((float(v) - self.lo[j]) / span * self.n_bins)
                    out[pos] = min(max(b, 0), self.n_bins - 1)
            else:
                out[pos] = self.vocab[j].get(v, len(self.vocab[j]))
        return out


class LabelCodec:
    """First-seen mapping between raw target tokens and integer codes."""

    def __init__(self, values: Sequence[Cell]):
        self.values: list[Cell] = []
        index: dict[Cell, int] = {}
        for v in values:
            if v is None:
                raise SchemaError("missing target label; labels cannot be imputed here")
            if v not in index:
                index[v] = len(index)
                self.values.append(v)
        self.index = index

    @property
    def n_classes(self) -> int:
        return len(self.values)

    def encode(self, values: Sequence[Cell]) -> np.ndarray:
        return np.array([self.index[v] for v in values], dtype=np.int64)

    def decode(self, code: int) -> Cell:
        return self.values[int(code)]


def train_labels(dataset: Dataset, rows: Sequence[int] | None = None) -> list[Cell]:
    """Raw target tokens of the given rows, as stored (possibly corrupted)."""
    t = dataset.schema.target_index
    if t is None:
        raise SchemaError("dataset has no target column")
    idx = range(dataset.n_rows) if rows is None else rows
    return [dataset.rows[i][t] for i in idx]


def numeric_feature_matrix(dataset: Dataset, rows: Sequence[int] | None = None,
                           cols: Sequence[int] | None = None) -> np.ndarray:
    """Raw (unscaled) numeric feature matrix; raises on missing cells."""
    if cols is None:
        cols = [
            j for j in dataset.schema.feature_indices
            if dataset.schema.columns[j].kind == NUMERIC
        ]
    idx = list(range(dataset.n_rows)) if rows is None else list(rows)
    out = np.empty((len(idx), len(cols)))
    for a, i in enumerate(idx):
        for b, j in enumerate(cols):
            out[a, b] = float(_check_present(dataset.rows[i][j], dataset.schema.columns[j].name))
    return out
