"""Six classical classifiers implemented from scratch on the Dataset type.

Every classifier exposes ``fit(dataset, rows=None)`` (rows are indices into
``dataset.rows``; None means all) and ``predict_cells(cells)`` /
``predict_rows(dataset, rows=None)`` returning raw label tokens.  Training
labels are read from the (possibly corrupted) rows, never from the clean
shadow.  Ties in argmax votes always break toward the lowest label index,
where label indices follow first-seen order in the training rows.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .corrupt import derive_seed
from .data import Cell, Dataset, NUMERIC
from .errors import (
    DivergenceError,
    EmptyInputError,
    ParameterError,
    SchemaError,
    UndefinedNodeError,
    UnsupportedTaskError,
)
from .features import Discretizer, FeatureEncoder, LabelCodec, train_labels

# ---------------------------------------------------------------------------
# node purity measures
# ---------------------------------------------------------------------------

def _as_counts(counts) -> np.ndarray:
    arr = np.asarray(counts, dtype=float)
    if arr.ndim != 1 or (arr < 0).any():
        raise UndefinedNodeError("counts must be a non-negative vector")
    if arr.sum() <= 0:
        raise UndefinedNodeError("purity measure undefined for an empty node")
    return arr


def gini(counts) -> float:
    """1 - sum of squared class frequencies; 0 for a pure node."""
    p = _as_counts(counts)
    p = p / p.sum()
    return float(1.0 - (p ** 2).sum())


def entropy(counts) -> float:
    """Shannon entropy in bits (base-2 log, 0*log0 treated as 0)."""
    p = _as_counts(counts)
    p = p / p.sum()
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def misclassification_error(counts) -> float:
    p = _as_counts(counts)
    return float(1.0 - p.max() / p.sum())


def information_gain(parent_counts, partitions) -> float:
    """Entropy reduction when the parent splits into the given partitions."""
    parent = _as_counts(parent_counts)
    total = parent.sum()
    children = [_as_counts(c) for c in partitions]
    if not math.isclose(sum(c.sum() for c in children), total):
        raise UndefinedNodeError("partitions must cover the parent node")
    weighted = sum(c.sum() / total * entropy(c) for c in children)
    return float(entropy(parent) - weighted)


def _impurity_rows(counts: np.ndarray, criterion: str) -> np.ndarray:
    """Row-wise impurity of a (m, n_classes) count matrix."""
    n = counts.sum(axis=1, keepdims=True)
    safe = np.where(n > 0, n, 1.0)
    p = counts / safe
    if criterion == "gini":
        out = 1.0 - (p ** 2).sum(axis=1)
    elif criterion == "gain":  # minimizing child entropy maximizes gain
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
        out = -(p * logs).sum(axis=1)
    elif criterion == "error":
        out = 1.0 - p.max(axis=1)
    else:
        raise ParameterError(f"unknown split criterion {criterion!r}")
    return np.where(n[:, 0] > 0, out, 0.0)


# ---------------------------------------------------------------------------
# decision tree
# ---------------------------------------------------------------------------

class _Node:
    __slots__ = ("label", "col", "is_numeric", "threshold", "category", "left", "right")

    def __init__(self, label=None):
        self.label = label  # leaf label code, None for internal nodes
        self.col = -1
        self.is_numeric = True
        self.threshold = 0.0
        self.category = -1
        self.left = None
        self.right = None


class DecisionTreeClassifier:
    """Greedy CART-style tree: numeric midpoints, one-vs-rest categories."""

    def __init__(self, criterion: str = "gini", max_depth: int = 25, min_split: int = 2,
                 features_per_split: int | None = None, rng: np.random.Generator | None = None):
        if criterion not in ("gini", "gain", "error"):
            raise ParameterError(f"unknown split criterion {criterion!r}")
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_split = max(2, min_split)
        self.features_per_split = features_per_split
        self.rng = rng
        self.root: _Node | None = None
        self.codec: LabelCodec | None = None

    def fit(self, dataset: Dataset, rows: Sequence[int] | None = None,
            codec: LabelCodec | None = None):
        idx = list(range(dataset.n_rows)) if rows is None else list(rows)
        if not idx:
            raise EmptyInputError("cannot train a tree on zero rows")
        labels = train_labels(dataset, idx)
        self.codec = codec if codec is not None else LabelCodec(labels)
        y = self.codec.encode(labels)
        self._feature_cols = list(dataset.schema.feature_indices)
        self._col_numeric = []
        self._col_values = []
        self._col_vocab: list[dict[str, int] | None] = []
        for j in self._feature_cols:
            col = dataset.schema.columns[j]
            if col.kind == NUMERIC:
                vals = np.array([self._need(dataset.rows[i][j], col.name) for i in idx],
                                dtype=float)
                self._col_numeric.append(True)
                self._col_values.append(vals)
                self._col_vocab.append(None)
            else:
                vocab: dict[str, int] = {}
                codes = np.empty(len(idx), dtype=np.int64)
                for a, i in enumerate(idx):
                    v = self._need(dataset.rows[i][j], col.name)
                    if v not in vocab:
                        vocab[v] = len(vocab)
                    codes[a] = vocab[v]
                self._col_numeric.append(False)
                self._col_values.append(codes)
                self._col_vocab.append(vocab)
        self.root = self._build(np.arange(len(idx)), y, depth=0)
        del self._col_values  # per-fit scratch; vocab kept for prediction
        return self

    @staticmethod
    def _need(value: Cell, name: str):
        if value is None:
            raise SchemaError(f"missing cell in column {name!r}; impute before training")
        return value

    def _leaf(self, counts: np.ndarray) -> _Node:
        return _Node(label=int(np.argmax(counts)))

    def _build(self, local: np.ndarray, y: np.ndarray, depth: int) -> _Node:
        counts = np.bincount(y[local], minlength=self.codec.n_classes).astype(float)
        if (
            depth >= self.max_depth
            or len(local) < self.min_split
            or (counts > 0).sum() <= 1
        ):
            return self._leaf(counts)
        best = self._best_split(local, y, counts)
        if best is None:
            return self._leaf(counts)
        pos, left_mask = best[0], best[1]
        node = _Node()
        node.col = pos
        node.is_numeric = self._col_numeric[pos]
        if node.is_numeric:
            node.threshold = best[2]
        else:
            node.category = best[2]
        node.left = self._build(local[left_mask], y, depth + 1)
        node.right = self._build(local[~left_mask], y, depth + 1)
        return node

    def _candidate_columns(self) -> list[int]:
        n_cols = len(self._feature_cols)
        if self.features_per_split is None or self.features_per_split >= n_cols:
            return list(range(n_cols))
        picked = self.rng.choice(n_cols, size=self.features_per_split, replace=False)
        return sorted(int(c) for c in picked)

    def _best_split(self, local: np.ndarray, y: np.ndarray, counts: np.ndarray):
        n = len(local)
        n_c = self.codec.n_classes
        parent = _impurity_rows(counts[None, :], self.criterion)[0]
        best = None  # (weighted_impurity, pos, left_mask, threshold_or_category)
        for pos in self._candidate_columns():
            vals = self._col_values[pos][local]
            if self._col_numeric[pos]:
                order = np.argsort(vals, kind="stable")
                sv = vals[order]
                sy = y[local][order]
                cuts = np.nonzero(sv[:-1] < sv[1:])[0]
                if len(cuts) == 0:
                    continue
                onehot = np.zeros((n, n_c))
                onehot[np.arange(n), sy] = 1.0
                cum = onehot.cumsum(axis=0)
                left = cum[cuts]
                right = counts[None, :] - left
                n_left = left.sum(axis=1)
                n_right = n - n_left
                weighted = (
                    n_left * _impurity_rows(left, self.criterion)
                    + n_right * _impurity_rows(right, self.criterion)
                ) / n
                k = int(np.argmin(weighted))
                if best is None or weighted[k] < best[0] - 1e-12:
                    thr = float((sv[cuts[k]] + sv[cuts[k] + 1]) / 2.0)
                    mask = np.zeros(n, dtype=bool)
                    mask[order[: cuts[k] + 1]] = True
                    best = (float(weighted[k]), pos, mask, thr)
            else:
                for cat in range(int(vals.max()) + 1 if len(vals) else 0):
                    mask = vals == cat
                    n_left = int(mask.sum())
                    if n_left == 0 or n_left == n:
                        continue
                    left = np.bincount(y[local][mask], minlength=n_c).astype(float)
                    right = counts - left
                    weighted = (
                        n_left * _impurity_rows(left[None, :], self.criterion)[0]
                        + (n - n_left) * _impurity_rows(right[None, :], self.criterion)[0]
                    ) / n
                    if best is None or weighted < best[0] - 1e-12:
                        best = (float(weighted), pos, mask, cat)
        if best is None or best[0] >= parent - 1e-12:
            return None
        return best[1], best[2], best[3]

    def predict_cells(self, cells: Sequence[Cell]) -> Cell:
        node = self.root
        while node.label is None:
            j = self._feature_cols[node.col]
            v = self._need(cells[j], f"column {j}")
            if node.is_numeric:
                node = node.left if float(v) <= node.threshold else node.right
            else:
                code = self._col_vocab[node.col].get(v, -1)
                node = node.left if code == node.category else node.right
        return self.codec.decode(node.label)

    def predict_rows(self, dataset: Dataset, rows: Sequence[int] | None = None) -> list[Cell]:
        idx = range(dataset.n_rows) if rows is None else rows
        return [self.predict_cells(dataset.rows[i]) for i in idx]


# ---------------------------------------------------------------------------
# k-nearest neighbors
# ---------------------------------------------------------------------------

class KNNClassifier:
    """Majority vote over the k nearest training rows (Euclidean distance on
    the shared min-max / overlap encoding)."""

    def __init__(self, k: int = 5):
        if k < 1:
            raise ParameterError("k must be at least 1")
        self.k = k

    def fit(self, dataset: Dataset, rows: Sequence[int] | None = None):
        idx = list(range(dataset.n_rows)) if rows is None else list(rows)
        if not idx:
            raise EmptyInputError("cannot fit KNN on zero rows")
        if self.k > len(idx):
            raise ParameterError(f"k={self.k} exceeds training size {len(idx)}")
        self.encoder = FeatureEncoder(dataset, idx)
        self.X = self.encoder.transform_rows(dataset, idx)
        labels = train_labels(dataset, idx)
        self.codec = LabelCodec(labels)
        self.y = self.codec.encode(labels)
        return self

    def predict_cells(self, cells: Sequence[Cell]) -> Cell:
        x = self.encoder.transform_cells(cells)
        d2 = ((self.X - x) ** 2).sum(axis=1)
        nearest = np.argsort(d2, kind="stable")[: self.k]
        votes = np.bincount(self.y[nearest], minlength=self.codec.n_classes)
        return self.codec.decode(int(np.argmax(votes)))

    def predict_rows(self, dataset: Dataset, rows: Sequence[int] | None = None) -> list[Cell]:
        idx = range(dataset.n_rows) if rows is None else rows
        return [self.predict_cells(dataset.rows[i]) for i in idx]


def euclidean_distance(p: Sequence[float], q: Sequence[float]) -> float:
    a = np.asarray(p, dtype=float)
    b = np.asarray(q, dtype=float)
    return float(np.sqrt(((a - b) ** 2).sum()))


# ---------------------------------------------------------------------------
# naive Bayes
# ---------------------------------------------------------------------------

class NaiveBayesClassifier:
    """Class priors times per-feature conditionals with additive smoothing.

    Numeric features are discretized into equal-width bins fitted on the
    training rows.
    """

    def __init__(self, smoothing: float = 1.0, n_bins: int = 10):
        if smoothing <= 0:
            raise ParameterError("smoothing must be positive")
        self.smoothing = smoothing
        self.n_bins = n_bins

    def fit(self, dataset: Dataset, rows: Sequence[int] | None = None):
        idx = list(range(dataset.n_rows)) if rows is None else list(rows)
        if not idx:
            raise EmptyInputError("cannot fit naive Bayes on zero rows")
        self.disc = Discretizer(dataset, idx, n_bins=self.n_bins)
        codes = self.disc.codes_rows(dataset, idx)
        labels = train_labels(dataset, idx)
        self.codec = LabelCodec(labels)
        y = self.codec.encode(labels)
        m = len(idx)
        n_c = self.codec.n_classes
        s = self.smoothing
        class_counts = np.bincount(y, minlength=n_c).astype(float)
        self.log_prior = np.log((class_counts + s) / (m + s * n_c))
        self.log_cond: list[np.ndarray] = []
        for f, card in enumerate(self.disc.cardinalities):
            tab = np.zeros((card, n_c))
            np.add.at(tab, (codes[:, f], y), 1.0)
            self.log_cond.append(np.log((tab + s) / (class_counts[None, :] + s * card)))
        return self

    def predict_log_joint(self, cells: Sequence[Cell]) -> np.ndarray:
        codes = self.disc.codes_cells(cells)
        log_joint = self.log_prior.copy()
        for f, c in enumerate(codes):
            log_joint += self.log_cond[f][c]
        return log_joint

    def predict_proba(self, cells: Sequence[Cell]) -> np.ndarray:
        lj = self.predict_log_joint(cells)
        lj -= lj.max()
        p = np.exp(lj)
        return p / p.sum()

    def predict_cells(self, cells: Sequence[Cell]) -> Cell:
        return self.codec.decode(int(np.argmax(self.predict_log_joint(cells))))

    def predict_rows(self, dataset: Dataset, rows: Sequence[int] | None = None) -> list[Cell]:
        idx = range(dataset.n_rows) if rows is None else rows
        return [self.predict_cells(dataset.rows[i]) for i in idx]


# ---------------------------------------------------------------------------
# Bayesian network
# ---------------------------------------------------------------------------

def _node_cost(codes: np.ndarray, cards: Sequence[int], v: int,
               parents: tuple[int, ...], smoothing: float, bits: float) -> float:
    """Description-length share of one node: coding cost of its parameters
    plus the negative log-likelihood of its column given its parents."""
    r_v = cards[v]
    if parents:
        dims = [cards[p] for p in parents]
        cfg = np.ravel_multi_index(tuple(codes[:, p] for p in parents), dims)
        n_cfg = int(np.prod(dims))
    else:
        cfg = np.zeros(len(codes), dtype=np.int64)
        n_cfg = 1
    tab = np.zeros((n_cfg, r_v))
    np.add.at(tab, (cfg, codes[:, v]), 1.0)
    probs = (tab + smoothing) / (tab.sum(axis=1, keepdims=True) + smoothing * r_v)
    loglik = float(np.log(probs[cfg, codes[:, v]]).sum())
    n_params = (r_v - 1) * n_cfg
    return bits * n_params - loglik


def bayes_net_cost(codes: np.ndarray, cards: Sequence[int],
                   parents: dict[int, tuple[int, ...]],
                   smoothing: float = 1.0, bits_per_param: float | None = None) -> float:
    """Total description length of a network structure on coded data."""
    m = len(codes)
    bits = bits_per_param if bits_per_param is not None else 0.5 * math.log2(max(m, 2))
    return sum(
        _node_cost(codes, cards, v, tuple(parents.get(v, ())), smoothing, bits)
        for v in range(codes.shape[1])
    )


class BayesianNetworkClassifier:
    """Greedy description-length structure search over add/remove edge moves,
    smoothed CPTs, and exact posterior enumeration over the class variable."""

    def __init__(self, max_parents: int = 2, n_bins: int = 10, smoothing: float = 1.0):
        if max_parents < 0:
            raise ParameterError("max_parents must be >= 0")
        self.max_parents = max_parents
        self.n_bins = n_bins
        self.smoothing = smoothing

    def fit(self, dataset: Dataset, rows: Sequence[int] | None = None):
        idx = list(range(dataset.n_rows)) if rows is None else list(rows)
        if not idx:
            raise EmptyInputError("cannot fit a Bayesian network on zero rows")
        self.disc = Discretizer(dataset, idx, n_bins=self.n_bins)
        feat_codes = self.disc.codes_rows(dataset, idx)
        labels = train_labels(dataset, idx)
        self.codec = LabelCodec(labels)
        y = self.codec.encode(labels)
        codes = np.column_stack([feat_codes, y])
        cards = list(self.disc.cardinalities) + [self.codec.n_classes]
        self.n_vars = codes.shape[1]
        self.class_var = self.n_vars - 1
        self.cards = cards
        m = len(idx)
        bits = 0.5 * math.log2(max(m, 2))

        parents: dict[int, tuple[int, ...]] = {v: () for v in range(self.n_vars)}
        node_costs = {
            v: _node_cost(codes, cards, v, (), self.smoothing, bits)
            for v in range(self.n_vars)
        }
        for _ in range(10 * self.n_vars * self.n_vars):
            best_move = None
            best_delta = -1e-9
            for v in range(self.n_vars):
                current = parents[v]
                for u in range(self.n_vars):
                    if u == v:
                        continue
                    if u in current:
                        cand = tuple(p for p in current if p != u)
                    else:
                        if len(current) >= self.max_parents:
                            continue
                        cand = tuple(sorted(current + (u,)))
                        if self._creates_cycle(parents, u, v):
                            continue
                    delta = (
                        _node_cost(codes, cards, v, cand, self.smoothing, bits)
                        - node_costs[v]
                    )
                    if delta < best_delta:
                        best_delta = delta
                        best_move = (v, cand)
            if best_move is None:
                break
            v, cand = best_move
            parents[v] = cand
            node_costs[v] = _node_cost(codes, cards, v, cand, self.smoothing, bits)
        self.parents = parents
        self.cost = sum(node_costs.values())

        self.cpts: dict[int, np.ndarray] = {}
        for v in range(self.n_vars):
            pa = parents[v]
            r_v = cards[v]
            if pa:
                dims = [cards[p] for p in pa]
                cfg = np.ravel_multi_index(tuple(codes[:, p] for p in pa), dims)
                n_cfg = int(np.prod(dims))
            else:
                cfg = np.zeros(m, dtype=np.int64)
                n_cfg = 1
            tab = np.zeros((n_cfg, r_v))
            np.add.at(tab, (cfg, codes[:, v]), 1.0)
            self.cpts[v] = np.log(
                (tab + self.smoothing) / (tab.sum(axis=1, keepdims=True) + self.smoothing * r_v)
            )
        return self

    @staticmethod
    def _creates_cycle(parents: dict[int, tuple[int, ...]], u: int, v: int) -> bool:
        """Would the edge u -> v close a directed cycle?"""
        stack = [u]
        seen = set()
        while stack:
            node = stack.pop()
            if node == v:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(parents[node])
        return False

    def _assignment_logp(self, assign: np.ndarray) -> float:
        total = 0.0
        for v in range(self.n_vars):
            pa = self.parents[v]
            if pa:
                dims = [self.cards[p] for p in pa]
                cfg = int(np.ravel_multi_index(tuple(assign[list(pa)]), dims))
            else:
                cfg = 0
            total += float(self.cpts[v][cfg, assign[v]])
        return total

    def predict_log_joint(self, cells: Sequence[Cell]) -> np.ndarray:
        codes = self.disc.codes_cells(cells)
        n_c = self.cards[self.class_var]
        out = np.empty(n_c)
        assign = np.append(codes, 0)
        for y in range(n_c):
            assign[self.class_var] = y
            out[y] = self._assignment_logp(assign)
        return out

    def predict_cells(self, cells: Sequence[Cell]) -> Cell:
        return self.codec.decode(int(np.argmax(self.predict_log_joint(cells))))

    def predict_rows(self, dataset: Dataset, rows: Sequence[int] | None = None) -> list[Cell]:
        idx = range(dataset.n_rows) if rows is None else rows
        return [self.predict_cells(dataset.rows[i]) for i in idx]


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------

def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def logistic_log_likelihood(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray) -> float:
    z = X @ w + b
    sign = 2.0 * y - 1.0
    return float(-np.logaddexp(0.0, -sign * z).sum())


def logistic_gradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray):
    """Exact gradient of the log-likelihood with respect to (w, b)."""
    residual = y - sigmoid(X @ w + b)
    return X.T @ residual, float(residual.sum())


class LogisticRegressionClassifier:
    """Binary classifier trained by batch gradient ascent on the
    log-likelihood; predicts the positive class when the squashed score
    reaches 0.5."""

    def __init__(self, lr: float = 0.1, iters: int = 500):
        if lr <= 0 or iters < 0:
            raise ParameterError("lr must be positive and iters non-negative")
        self.lr = lr
        self.iters = iters

    def fit(self, dataset: Dataset, rows: Sequence[int] | None = None):
        idx = list(range(dataset.n_rows)) if rows is None else list(rows)
        if not idx:
            raise EmptyInputError("cannot fit logistic regression on zero rows")
        labels = train_labels(dataset, idx)
        self.codec = LabelCodec(labels)
        if self.codec.n_classes != 2:
            raise UnsupportedTaskError(
                f"logistic regression needs a binary target, got {self.codec.n_classes} classes"
            )
        self.encoder = FeatureEncoder(dataset, idx)
        X = self.encoder.transform_rows(dataset, idx)
        y = self.codec.encode(labels).astype(float)
        m = len(idx)
        w = np.zeros(X.shape[1])
        b = 0.0
        for _ in range(self.iters):
            gw, gb = logistic_gradient(w, b, X, y)
            if not (np.isfinite(gw).all() and np.isfinite(gb)):
                raise DivergenceError("non-finite gradient during logistic training")
            w += self.lr * gw / m
            b += self.lr * gb / m
        if not (np.isfinite(w).all() and np.isfinite(b)):
            raise DivergenceError("logistic weights diverged")
        self.w = w
        self.b = b
        return self

    def decision_value(self, cells: Sequence[Cell]) -> float:
        x = self.encoder.transform_cells(cells)
        return float(sigmoid(x @ self.w + self.b))

    def predict_cells(self, cells: Sequence[Cell]) -> Cell:
        return self.codec.decode(1 if self.decision_value(cells) >= 0.5 else 0)

    def predict_rows(self, dataset: Dataset, rows: Sequence[int] | None = None) -> list[Cell]:
        idx = range(dataset.n_rows) if rows is None else rows
        return [self.predict_cells(dataset.rows[i]) for i in idx]


# ---------------------------------------------------------------------------
# random forest
# ---------------------------------------------------------------------------

class RandomForestClassifier:
    """Bagged decision trees with a random feature subset at every split."""

    def __init__(self, n_trees: int = 50, feat_frac: float | None = None, seed: int = 0,
                 bootstrap: bool = True, criterion: str = "gini",
                 max_depth: int = 25, min_split: int = 2):
        if n_trees < 1:
            raise ParameterError("n_trees must be at least 1")
        self.n_trees = n_trees
        self.feat_frac = feat_frac
        self.seed = seed
        self.bootstrap = bootstrap
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_split = min_split

    def fit(self, dataset: Dataset, rows: Sequence[int] | None = None):
        idx = list(range(dataset.n_rows)) if rows is None else list(rows)
        if not idx:
            raise EmptyInputError("cannot fit a forest on zero rows")
        labels = train_labels(dataset, idx)
        self.codec = LabelCodec(labels)
        n_feat = dataset.schema.n
        if self.feat_frac is None:
            per_split = max(1, math.ceil(math.sqrt(n_feat)))
        else:
            per_split = max(1, math.ceil(self.feat_frac * n_feat))
        per_split = min(per_split, n_feat)
        self.trees: list[DecisionTreeClassifier] = []
        for t in range(self.n_trees):
            rng = np.random.default_rng(derive_seed(self.seed, "tree", t))
            if self.bootstrap:
                sample = [idx[int(i)] for i in rng.integers(0, len(idx), size=len(idx))]
            else:
                sample = idx
            tree = DecisionTreeClassifier(
                criterion=self.criterion,
                max_depth=self.max_depth,
                min_split=self.min_split,
                features_per_split=per_split if per_split < n_feat else None,
                rng=rng,
            )
            tree.fit(dataset, sample, codec=self.codec)
            self.trees.append(tree)
        return self

    def predict_cells(self, cells: Sequence[Cell]) -> Cell:
        votes = np.zeros(self.codec.n_classes, dtype=int)
        for tree in self.trees:
            votes[self.codec.index[tree.predict_cells(cells)]] += 1
        return self.codec.decode(int(np.argmax(votes)))

    def predict_rows(self, dataset: Dataset, rows: Sequence[int] | None = None) -> list[Cell]:
        idx = range(dataset.n_rows) if rows is None else rows
        return [self.predict_cells(dataset.rows[i]) for i in idx]
