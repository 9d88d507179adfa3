"""Six clustering algorithms over the shared feature encoding.

Every function takes a Dataset (mean/mode-imputed first if it still has
missing cells), clusters its rows, and returns a :class:`Clustering` whose
``assignments`` array maps row index to cluster index (-1 marks DBSCAN
noise).  ``meta`` carries algorithm traces used by the property tests:
per-iteration SSE for k-means, accepted-cost trace for CLARANS, centroids in
original units when the features are all numeric.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corrupt import impute
from .data import Dataset
from .errors import ParameterError
from .features import FeatureEncoder

NOISE = -1


@dataclass
class Clustering:
    assignments: np.ndarray
    n_clusters: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = self.assignments
        bad = (a != NOISE) & ((a < 0) | (a >= self.n_clusters))
        if bad.any():
            raise ParameterError("cluster index out of range")

    def export_rows(self) -> list[tuple[int, int]]:
        """(row index, cluster index) pairs; noise rows carry -1."""
        return [(i, int(c)) for i, c in enumerate(self.assignments)]


def write_clustering(clustering: Clustering, path, delimiter: str = ",") -> None:
    """Two-column delimited export: row index, cluster index (noise = -1)."""
    from pathlib import Path

    lines = [f"row{delimiter}cluster"]
    lines += [f"{i}{delimiter}{c}" for i, c in clustering.export_rows()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def encode_for_clustering(d: Dataset) -> tuple[np.ndarray, FeatureEncoder]:
    work = impute(d) if d.has_missing() else d
    enc = FeatureEncoder(work)
    return enc.transform_rows(work), enc


def _maybe_original_centroids(enc: FeatureEncoder, centroids: np.ndarray):
    if enc.categorical_cols:
        return None
    return np.array([enc.inverse_numeric(c) for c in centroids])


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

def _maximin_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick k data points: seeded first pick, then farthest-first."""
    chosen = [int(rng.integers(len(X)))]
    min_d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        nxt = int(min_d2.argmax())
        chosen.append(nxt)
        min_d2 = np.minimum(min_d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def kmeans(d: Dataset, k: int, seed: int = 0, max_iters: int = 100) -> Clustering:
    """Lloyd iterations from k maximin-seeded data points; empty clusters are
    re-seeded with the point farthest from its current centroid."""
    X, enc = encode_for_clustering(d)
    n = len(X)
    if k < 1:
        raise ParameterError("k must be at least 1")
    if k > n:
        raise ParameterError(f"k={k} exceeds row count {n}")
    rng = np.random.default_rng(seed)
    centroids = _maximin_init(X, k, rng)
    assign = np.full(n, -1)
    sse_trace: list[float] = []
    for _ in range(max_iters):
        d2 = _sq_dists(X, centroids)
        new_assign = d2.argmin(axis=1)
        sse_trace.append(float(d2[np.arange(n), new_assign].sum()))
        for c in range(k):
            if not (new_assign == c).any():
                stray = int(d2[np.arange(n), new_assign].argmax())
                centroids[c] = X[stray]
                new_assign[stray] = c
        if (new_assign == assign).all():
            break
        assign = new_assign
        for c in range(k):
            members = X[assign == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
    meta = {"centroids": centroids, "sse": sse_trace}
    raw = _maybe_original_centroids(enc, centroids)
    if raw is not None:
        meta["centroids_original"] = raw
    return Clustering(assign, k, meta)


def kmeans_sse(X: np.ndarray, assign: np.ndarray, k: int) -> float:
    """Sum of squared distances to the per-cluster means (oracle helper)."""
    total = 0.0
    for c in range(k):
        members = X[assign == c]
        if len(members):
            total += float(((members - members.mean(axis=0)) ** 2).sum())
    return total


# ---------------------------------------------------------------------------
# learning vector quantization
# ---------------------------------------------------------------------------

def lvq(d: Dataset, q: int | None = None, learning_rate: float = 0.1,
        iters: int = 1000, seed: int = 0) -> Clustering:
    """Label-guided prototypes: pull the nearest prototype toward a sample
    with the same label, push it away otherwise.

    Training reads the dataset's stored labels (dirty ones included);
    evaluation against clean truth is the harness's job.
    """
    work = impute(d) if d.has_missing() else d
    enc = FeatureEncoder(work)
    X = enc.transform_rows(work)
    t = work.schema.target_index
    if t is None:
        raise ParameterError("LVQ needs a labeled dataset")
    labels = [work.rows[i][t] for i in range(work.n_rows)]
    order: dict = {}
    for v in labels:
        if v not in order:
            order[v] = len(order)
    y = np.array([order[v] for v in labels])
    n_c = len(order)
    if q is None:
        q = n_c
    if q < n_c:
        raise ParameterError(f"q={q} is below the label count {n_c}")
    rng = np.random.default_rng(seed)
    proto_idx: list[int] = []
    for c in range(n_c):  # every label gets at least one prototype
        members = np.flatnonzero(y == c)
        proto_idx.append(int(rng.choice(members)))
    remaining = [i for i in range(len(X)) if i not in set(proto_idx)]
    extra = q - n_c
    if extra:
        proto_idx.extend(int(i) for i in rng.choice(remaining, size=extra, replace=False))
    protos = X[proto_idx].copy()
    proto_labels = y[proto_idx].copy()
    for _ in range(iters):
        i = int(rng.integers(len(X)))
        d2 = ((protos - X[i]) ** 2).sum(axis=1)
        p = int(d2.argmin())
        step = learning_rate * (X[i] - protos[p])
        protos[p] += step if proto_labels[p] == y[i] else -step
    assign = _sq_dists(X, protos).argmin(axis=1)
    return Clustering(assign, q, {"prototypes": protos, "prototype_labels": proto_labels})


# ---------------------------------------------------------------------------
# CLARANS
# ---------------------------------------------------------------------------

def clarans(d: Dataset, k: int, num_local: int = 5, max_neighbor: int = 100,
            seed: int = 0) -> Clustering:
    """Randomized medoid search: accept any cost-decreasing single-medoid
    swap, give up a restart after max_neighbor consecutive failures."""
    X, enc = encode_for_clustering(d)
    n = len(X)
    if k < 1 or k > n:
        raise ParameterError(f"k={k} out of range for {n} rows")
    rng = np.random.default_rng(seed)
    all_d = np.sqrt(_sq_dists(X, X))

    def cost_of(medoids: np.ndarray) -> float:
        return float(all_d[:, medoids].min(axis=1).sum())

    best_medoids = None
    best_cost = np.inf
    traces: list[list[float]] = []
    for _ in range(num_local):
        medoids = rng.choice(n, size=k, replace=False)
        current = cost_of(medoids)
        trace = [current]
        fails = 0
        while fails < max_neighbor:
            pos = int(rng.integers(k))
            candidate = int(rng.integers(n))
            if candidate in medoids:
                fails += 1
                continue
            trial = medoids.copy()
            trial[pos] = candidate
            c = cost_of(trial)
            if c < current - 1e-12:
                medoids, current = trial, c
                trace.append(current)
                fails = 0
            else:
                fails += 1
        traces.append(trace)
        if current < best_cost:
            best_cost = current
            best_medoids = medoids
    assign = all_d[:, best_medoids].argmin(axis=1)
    return Clustering(assign, k, {"medoids": best_medoids, "cost": best_cost,
                                  "accepted_costs": traces})


# ---------------------------------------------------------------------------
# DBSCAN
# ---------------------------------------------------------------------------

def dbscan(d: Dataset, eps: float, min_pts: int = 4) -> Clustering:
    """Density clustering: clusters are eps-connected components of core
    points; border points join the lowest-indexed adjacent cluster."""
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if min_pts < 1:
        raise ParameterError("min_pts must be at least 1")
    X, enc = encode_for_clustering(d)
    n = len(X)
    dist = np.sqrt(_sq_dists(X, X))
    within = dist <= eps
    core = within.sum(axis=1) >= min_pts  # neighbor count includes self

    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    core_idx = np.flatnonzero(core)
    for ai, a in enumerate(core_idx):
        for b in core_idx[ai + 1:]:
            if within[a, b]:
                ra, rb = find(int(a)), find(int(b))
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    cluster_of_root: dict[int, int] = {}
    assign = np.full(n, NOISE)
    for a in core_idx:
        root = find(int(a))
        if root not in cluster_of_root:
            cluster_of_root[root] = len(cluster_of_root)
        assign[a] = cluster_of_root[root]
    for i in range(n):
        if assign[i] != NOISE or core[i]:
            continue
        neighbor_clusters = [int(assign[j]) for j in np.flatnonzero(within[i]) if core[j]]
        if neighbor_clusters:
            assign[i] = min(neighbor_clusters)
    return Clustering(assign, len(cluster_of_root),
                      {"core_points": core_idx, "n_core": int(core.sum())})


def dbscan_default_eps(d: Dataset, min_pts: int = 4, percentile: float = 90.0) -> float:
    """Radius heuristic frozen on the clean data: percentile of the
    min_pts-th nearest-neighbor distances."""
    X, _ = encode_for_clustering(d)
    dist = np.sqrt(_sq_dists(X, X))
    kth = np.sort(dist, axis=1)[:, min(min_pts, len(X) - 1)]
    return float(np.percentile(kth, percentile))


# ---------------------------------------------------------------------------
# BIRCH
# ---------------------------------------------------------------------------

class _CF:
    """Clustering feature: count, linear sum, component-wise square sum."""

    __slots__ = ("n", "ls", "ss")

    def __init__(self, point: np.ndarray | None = None, dim: int | None = None):
        if point is not None:
            self.n = 1
            self.ls = point.copy()
            self.ss = point * point
        else:
            self.n = 0
            self.ls = np.zeros(dim)
            self.ss = np.zeros(dim)

    def add(self, other: "_CF"):
        self.n += other.n
        self.ls += other.ls
        self.ss += other.ss

    def merged(self, other: "_CF") -> "_CF":
        out = _CF(dim=len(self.ls))
        out.add(self)
        out.add(other)
        return out

    @property
    def centroid(self) -> np.ndarray:
        return self.ls / self.n

    @property
    def radius(self) -> float:
        # mean squared distance to the centroid, clipped against rounding
        val = self.ss.sum() / self.n - (self.centroid ** 2).sum()
        return float(np.sqrt(max(val, 0.0)))


class _CFNode:
    __slots__ = ("is_leaf", "entries", "children")

    def __init__(self, is_leaf: bool):
        self.is_leaf = is_leaf
        self.entries: list[_CF] = []
        self.children: list["_CFNode"] = []


def _nearest_entry(node: _CFNode, point: np.ndarray) -> int:
    cents = np.array([e.centroid for e in node.entries])
    return int(((cents - point) ** 2).sum(axis=1).argmin())


def _split_node(node: _CFNode) -> tuple[_CFNode, _CFNode]:
    cents = np.array([e.centroid for e in node.entries])
    d2 = ((cents[:, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
    a, b = np.unravel_index(int(d2.argmax()), d2.shape)
    left, right = _CFNode(node.is_leaf), _CFNode(node.is_leaf)
    for i, e in enumerate(node.entries):
        to_left = d2[i, a] <= d2[i, b]
        side = left if to_left else right
        side.entries.append(e)
        if not node.is_leaf:
            side.children.append(node.children[i])
    if not left.entries:  # degenerate tie layout
        left.entries.append(right.entries.pop())
        if not node.is_leaf:
            left.children.append(right.children.pop())
    if not right.entries:
        right.entries.append(left.entries.pop())
        if not node.is_leaf:
            right.children.append(left.children.pop())
    return left, right


def _insert_cf(node: _CFNode, cf: _CF, threshold: float, branching: int):
    """Insert a single-point CF; returns a (left, right) pair on split."""
    if node.is_leaf:
        if node.entries:
            i = _nearest_entry(node, cf.centroid)
            merged = node.entries[i].merged(cf)
            if merged.radius <= threshold:
                node.entries[i] = merged
            else:
                node.entries.append(cf)
        else:
            node.entries.append(cf)
    else:
        i = _nearest_entry(node, cf.centroid)
        split = _insert_cf(node.children[i], cf, threshold, branching)
        if split is None:
            node.entries[i].add(cf)
        else:
            left, right = split
            node.children[i] = left
            node.entries[i] = _summarize(left)
            node.children.append(right)
            node.entries.append(_summarize(right))
    if len(node.entries) > branching:
        return _split_node(node)
    return None


def _summarize(node: _CFNode) -> _CF:
    out = _CF(dim=len(node.entries[0].ls))
    for e in node.entries:
        out.add(e)
    return out


def _collect_leaf_entries(node: _CFNode) -> list[_CF]:
    if node.is_leaf:
        return list(node.entries)
    out = []
    for child in node.children:
        out.extend(_collect_leaf_entries(child))
    return out


def _min_linkage_merge(points: np.ndarray, k: int) -> list[list[int]]:
    """Agglomerate points to k groups under single (MIN) linkage.

    Cluster-to-cluster distances are updated in place with the single-linkage
    rule d(a+b, c) = min(d(a, c), d(b, c)); merge ties resolve to the lowest
    index pair, so results are order-stable.
    """
    n = len(points)
    if k > n:
        raise ParameterError(f"cannot form {k} groups from {n} points")
    d = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2))
    d[np.tril_indices(n)] = np.inf
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    while len(members) > k:
        a, b = np.unravel_index(int(d.argmin()), d.shape)
        a, b = int(a), int(b)
        members[a].extend(members.pop(b))
        merged_row = np.minimum(
            np.minimum(d[a, :], d[:, a]), np.minimum(d[b, :], d[:, b])
        )
        d[a, :] = np.inf
        d[:, a] = np.inf
        d[b, :] = np.inf
        d[:, b] = np.inf
        for c in members:
            if c == a:
                continue
            lo, hi = (c, a) if c < a else (a, c)
            d[lo, hi] = merged_row[c]
    return [members[key] for key in sorted(members)]


def birch(d: Dataset, k: int, branching: int = 50, threshold: float = 0.25) -> Clustering:
    """Single-pass CF-tree summarization, MIN-linkage merge of the leaf-entry
    centroids down to k seeds, then a nearest-seed rescan of all rows."""
    if threshold <= 0:
        raise ParameterError("threshold must be positive")
    if branching < 2:
        raise ParameterError("branching must be at least 2")
    X, enc = encode_for_clustering(d)
    root = _CFNode(is_leaf=True)
    for x in X:
        split = _insert_cf(root, _CF(point=x), threshold, branching)
        if split is not None:
            left, right = split
            new_root = _CFNode(is_leaf=False)
            new_root.children = [left, right]
            new_root.entries = [_summarize(left), _summarize(right)]
            root = new_root
    leaf_entries = _collect_leaf_entries(root)
    if k > len(leaf_entries):
        raise ParameterError(
            f"k={k} exceeds the {len(leaf_entries)} leaf entries; lower the threshold"
        )
    cents = np.array([e.centroid for e in leaf_entries])
    groups = _min_linkage_merge(cents, k)
    seeds = np.empty((k, X.shape[1]))
    for g, members in enumerate(groups):
        merged = _CF(dim=X.shape[1])
        for i in members:
            merged.add(leaf_entries[i])
        seeds[g] = merged.centroid
    assign = _sq_dists(X, seeds).argmin(axis=1)
    meta = {"seeds": seeds, "n_leaf_entries": len(leaf_entries), "cf_root": root}
    raw = _maybe_original_centroids(enc, seeds)
    if raw is not None:
        meta["centroids_original"] = raw
    return Clustering(assign, k, meta)


# ---------------------------------------------------------------------------
# CURE
# ---------------------------------------------------------------------------

def cure(d: Dataset, k: int, n_rep: int = 5, shrink: float = 0.3,
         sample_frac: float = 0.25, seed: int = 0) -> Clustering:
    """Representative-point clustering: MIN-linkage on a seeded sample,
    farthest-first representatives shrunk toward each centroid, then
    nearest-representative assignment of every row."""
    if not 0.0 < shrink <= 1.0:
        raise ParameterError("shrink must be in (0, 1]")
    if n_rep < 1:
        raise ParameterError("n_rep must be at least 1")
    X, enc = encode_for_clustering(d)
    n = len(X)
    size = int(round(sample_frac * n))
    if size < k:
        raise ParameterError(f"sample of {size} rows is smaller than k={k}")
    rng = np.random.default_rng(seed)
    sample = np.sort(rng.choice(n, size=size, replace=False))
    S = X[sample]
    groups = _min_linkage_merge(S, k)
    rep_points = []
    rep_cluster = []
    for g, members in enumerate(groups):
        pts = S[members]
        centroid = pts.mean(axis=0)
        chosen: list[int] = []
        for r in range(min(n_rep, len(pts))):
            if not chosen:
                dist = ((pts - centroid) ** 2).sum(axis=1)
            else:
                dist = np.min(
                    ((pts[:, None, :] - pts[chosen][None, :, :]) ** 2).sum(axis=2), axis=1
                )
                dist[chosen] = -1.0
            chosen.append(int(dist.argmax()))
        for i in chosen:
            rep_points.append(pts[i] + shrink * (centroid - pts[i]))
            rep_cluster.append(g)
    reps = np.array(rep_points)
    rep_cluster = np.array(rep_cluster)
    nearest = _sq_dists(X, reps).argmin(axis=1)
    assign = rep_cluster[nearest]
    return Clustering(assign, k, {"representatives": reps, "rep_cluster": rep_cluster,
                                  "sample": sample})
