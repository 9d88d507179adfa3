"""Four regression fitters sharing a fit/predict contract.

All fitters use the numeric feature columns only; categorical feature columns
are dropped with a warning.  Linear solves go through the normal equations
with a Cholesky factorization and fall back to a lightly damped ridge system
when the design is singular (the model records that it did).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .data import Cell, Dataset, NUMERIC
from .errors import (
    DivergenceError,
    EmptyInputError,
    ParameterError,
    SchemaError,
    SingularityError,
)
from .features import numeric_feature_matrix

RIDGE_DAMPING = 1e-8


@dataclass
class LinearModel:
    weights: np.ndarray          # one coefficient per used feature column
    intercept: float
    feature_cols: tuple[int, ...]
    ridge_fallback: bool = False
    ll_trace: list[float] | None = None

    def evaluate(self, x: np.ndarray) -> float:
        return float(x @ self.weights + self.intercept)


@dataclass
class PolynomialModel:
    degree: int
    coefficients: np.ndarray     # shape (degree, n_features): per-power, per-feature
    intercept: float
    feature_cols: tuple[int, ...]
    ridge_fallback: bool = False

    def evaluate(self, x: np.ndarray) -> float:
        total = self.intercept
        for p in range(1, self.degree + 1):
            total += float(self.coefficients[p - 1] @ (x ** p))
        return total


@dataclass
class StepwiseModel:
    selected: tuple[int, ...]    # positions into feature_cols
    inner: LinearModel
    feature_cols: tuple[int, ...]

    def evaluate(self, x: np.ndarray) -> float:
        return self.inner.evaluate(x[list(self.selected)])


RegressionModel = LinearModel | PolynomialModel | StepwiseModel


def _numeric_setup(dataset: Dataset, rows: Sequence[int] | None):
    idx = list(range(dataset.n_rows)) if rows is None else list(rows)
    if not idx:
        raise EmptyInputError("cannot fit a regression on zero rows")
    t = dataset.schema.target_index
    if t is None or dataset.schema.columns[t].kind != NUMERIC:
        raise SchemaError("regression needs a numeric target column")
    num_cols = []
    dropped = []
    for j in dataset.schema.feature_indices:
        if dataset.schema.columns[j].kind == NUMERIC:
            num_cols.append(j)
        else:
            dropped.append(dataset.schema.columns[j].name)
    if dropped:
        warnings.warn(
            f"dropping categorical feature columns for regression: {dropped}",
            stacklevel=3,
        )
    if not num_cols:
        raise SchemaError("regression needs at least one numeric feature column")
    X = numeric_feature_matrix(dataset, idx, num_cols)
    y = np.array([float(_target(dataset, i, t)) for i in idx])
    return X, y, tuple(num_cols)


def _target(dataset: Dataset, i: int, t: int) -> float:
    v = dataset.rows[i][t]
    if v is None:
        raise SchemaError("missing target value; impute before fitting")
    return float(v)


def solve_normal_equations(A: np.ndarray, y: np.ndarray,
                           allow_ridge: bool = True) -> tuple[np.ndarray, bool]:
    """Solve min ||A beta - y||^2 via A'A; damped retry on singularity."""
    At_A = A.T @ A
    At_y = A.T @ y
    try:
        chol = np.linalg.cholesky(At_A)
        pivots = np.diag(chol)
        # rounding can push an exactly singular system through the
        # factorization; a collapsed pivot (pivots scale as sqrt of the
        # eigenvalues, so sqrt(eps)-level ratios) betrays it
        if pivots.min() <= 1e-6 * max(pivots.max(), 1e-300):
            raise np.linalg.LinAlgError("near-zero Cholesky pivot")
        beta = np.linalg.solve(chol.T, np.linalg.solve(chol, At_y))
        return beta, False
    except np.linalg.LinAlgError:
        if not allow_ridge:
            raise SingularityError("design matrix is singular") from None
        damped = At_A + RIDGE_DAMPING * np.eye(At_A.shape[0])
        try:
            beta = np.linalg.solve(damped, At_y)
        except np.linalg.LinAlgError as exc:
            raise SingularityError("design matrix is singular even with damping") from exc
        return beta, True


def _design(X: np.ndarray) -> np.ndarray:
    return np.column_stack([X, np.ones(len(X))])


def fit_least_squares(dataset: Dataset, rows: Sequence[int] | None = None,
                      allow_ridge: bool = True) -> LinearModel:
    """Minimize the sum of squared residuals over (weights, intercept)."""
    X, y, cols = _numeric_setup(dataset, rows)
    beta, ridged = solve_normal_equations(_design(X), y, allow_ridge)
    return LinearModel(weights=beta[:-1], intercept=float(beta[-1]),
                       feature_cols=cols, ridge_fallback=ridged)


def gaussian_log_likelihood(residuals: np.ndarray) -> float:
    """Profile log-likelihood of residuals under a fitted constant variance."""
    m = len(residuals)
    sse = float(residuals @ residuals)
    if sse <= 0:
        sse = 1e-300  # exact interpolation; keep the value finite
    sigma2 = sse / m
    return -0.5 * m * (math.log(2.0 * math.pi * sigma2) + 1.0)


def fit_maximum_likelihood(dataset: Dataset, rows: Sequence[int] | None = None,
                           max_iters: int = 5000, tol: float = 1e-14) -> LinearModel:
    """Gradient ascent on the Gaussian log-likelihood with backtracking, so
    every recorded step is non-decreasing.  Features are standardized for
    conditioning; coefficients are reported in original units."""
    X, y, cols = _numeric_setup(dataset, rows)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    Z = (X - mu) / sd
    m = len(y)
    w = np.zeros(Z.shape[1])
    b = float(y.mean())
    step = 1.0
    trace = []
    residuals = y - (Z @ w + b)
    ll = gaussian_log_likelihood(residuals)
    trace.append(ll)
    for _ in range(max_iters):
        gw = Z.T @ residuals / m
        gb = float(residuals.mean())
        gnorm = float(np.sqrt(gw @ gw + gb * gb))
        if not math.isfinite(gnorm):
            raise DivergenceError("non-finite gradient in likelihood ascent")
        if gnorm < 1e-13:
            break
        improved = False
        while step > 1e-18:
            w_try = w + step * gw
            b_try = b + step * gb
            r_try = y - (Z @ w_try + b_try)
            ll_try = gaussian_log_likelihood(r_try)
            if ll_try >= ll:
                w, b, residuals, ll = w_try, b_try, r_try, ll_try
                trace.append(ll)
                improved = True
                step *= 1.5
                break
            step *= 0.5
        if not improved:
            break
        if len(trace) > 2 and abs(trace[-1] - trace[-2]) < tol * max(abs(ll), 1.0):
            break
    weights = w / sd
    intercept = b - float(mu @ weights)
    return LinearModel(weights=weights, intercept=intercept, feature_cols=cols,
                       ll_trace=trace)


def fit_polynomial(dataset: Dataset, degree: int = 3, rows: Sequence[int] | None = None,
                   allow_ridge: bool = True) -> PolynomialModel:
    """Least squares over per-feature power expansions x, x^2, ..., x^degree."""
    if degree < 1:
        raise ParameterError("degree must be at least 1")
    X, y, cols = _numeric_setup(dataset, rows)
    blocks = [X ** p for p in range(1, degree + 1)]
    design = _design(np.hstack(blocks))
    beta, ridged = solve_normal_equations(design, y, allow_ridge)
    n_feat = X.shape[1]
    coef = beta[:-1].reshape(degree, n_feat)
    return PolynomialModel(degree=degree, coefficients=coef, intercept=float(beta[-1]),
                           feature_cols=cols, ridge_fallback=ridged)


def _sse_of(A: np.ndarray, y: np.ndarray) -> float:
    beta, _ = solve_normal_equations(A, y)
    r = y - A @ beta
    return float(r @ r)


def fit_stepwise(dataset: Dataset, alpha_in: float = 0.05, alpha_out: float = 0.10,
                 rows: Sequence[int] | None = None) -> StepwiseModel:
    """Forward/backward selection by partial F-tests: add the most significant
    candidate with p < alpha_in, drop selected columns with p > alpha_out."""
    if not 0 < alpha_in <= alpha_out < 1:
        raise ParameterError("need 0 < alpha_in <= alpha_out < 1")
    X, y, cols = _numeric_setup(dataset, rows)
    m, n_feat = X.shape
    selected: list[int] = []

    def sse_for(subset: list[int]) -> float:
        if not subset:
            r = y - y.mean()
            return float(r @ r)
        return _sse_of(_design(X[:, subset]), y)

    # exact fits collapse the F statistic; measure "zero" against the
    # intercept-only sum of squares
    tol = 1e-12 * max(sse_for([]), 1.0)

    def partial_f_p(num: float, denom: float, dof: int) -> float:
        if denom > tol:
            return float(stats.f.sf(num / denom, 1, dof))
        return 0.0 if num > tol else 1.0

    for _ in range(100):
        changed = False
        current_sse = sse_for(selected)
        # forward: most significant candidate enters
        best = None
        for j in range(n_feat):
            if j in selected:
                continue
            trial = selected + [j]
            dof = m - len(trial) - 1
            if dof <= 0:
                continue
            sse_trial = sse_for(trial)
            p = partial_f_p(max(current_sse - sse_trial, 0.0), sse_trial / dof, dof)
            if best is None or p < best[0]:
                best = (p, j)
        if best is not None and best[0] < alpha_in:
            selected.append(best[1])
            changed = True
        # backward: least significant selected column leaves
        if selected:
            full_sse = sse_for(selected)
            dof = m - len(selected) - 1
            worst = None
            if dof > 0:
                for j in selected:
                    reduced = [c for c in selected if c != j]
                    num = max(sse_for(reduced) - full_sse, 0.0)
                    p = partial_f_p(num, full_sse / dof, dof)
                    if worst is None or p > worst[0]:
                        worst = (p, j)
            if worst is not None and worst[0] > alpha_out:
                selected.remove(worst[1])
                changed = True
        if not changed:
            break

    selected = sorted(selected)
    if selected:
        beta, ridged = solve_normal_equations(_design(X[:, selected]), y)
        inner = LinearModel(weights=beta[:-1], intercept=float(beta[-1]),
                            feature_cols=tuple(cols[j] for j in selected),
                            ridge_fallback=ridged)
    else:
        inner = LinearModel(weights=np.zeros(0), intercept=float(y.mean()),
                            feature_cols=())
    return StepwiseModel(selected=tuple(selected), inner=inner, feature_cols=cols)


def predict(model: RegressionModel, cells: Sequence[Cell]) -> float:
    """Evaluate a fitted model on one record (full schema arity)."""
    x = np.empty(len(model.feature_cols))
    for pos, j in enumerate(model.feature_cols):
        v = cells[j]
        if v is None:
            raise SchemaError("missing feature value at prediction; impute first")
        x[pos] = float(v)
    return model.evaluate(x)


def predict_rows(model: RegressionModel, dataset: Dataset,
                 rows: Sequence[int] | None = None) -> np.ndarray:
    idx = range(dataset.n_rows) if rows is None else rows
    return np.array([predict(model, dataset.rows[i]) for i in idx])
