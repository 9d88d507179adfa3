"""Seeded injection of the three dirty-data types, plus mean/mode imputation.

All injectors are pure: they return a new Dataset and leave the input (and its
clean shadow) untouched.  Rate denominators: cells for missing data, rows for
inconsistent and conflicting data.  Inconsistent/conflicting injection chases
the detector reading, so the achieved row fraction lands within one row of the
requested rate on data with workable group structure.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .data import (
    CATEGORICAL,
    Cell,
    Dataset,
    FDRule,
    NUMERIC,
    TARGET,
)
from .errors import (
    ConfigurationError,
    ImputationImpossibleError,
    InjectionImpossibleError,
)

MISSING = "missing"
INCONSISTENT = "inconsistent"
CONFLICTING = "conflicting"
ERROR_TYPES = (MISSING, INCONSISTENT, CONFLICTING)


def derive_seed(root: int, *parts) -> int:
    """Stable 63-bit seed from a root seed and arbitrary context tokens.

    Uses sha256 rather than hash() so sweep points reproduce across process
    restarts regardless of PYTHONHASHSEED.
    """
    payload = repr((int(root),) + tuple(str(p) for p in parts)).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big") >> 1


@dataclass(frozen=True)
class CorruptionSpec:
    error_type: str
    rate: float
    seed: int = 0
    column_mask: tuple[str, ...] | None = None
    corrupt_target_in_train: bool = False
    rules: tuple[FDRule, ...] = ()
    entity_key: tuple[str, ...] = ()

    def __post_init__(self):
        if self.error_type not in ERROR_TYPES:
            raise ConfigurationError(f"unknown error type {self.error_type!r}")
        if not 0.0 <= self.rate <= 1.0:
            raise ConfigurationError(f"rate must be in [0, 1], got {self.rate}")
        if self.error_type == INCONSISTENT and not self.rules:
            raise ConfigurationError("inconsistent injection requires FD rules")
        if self.error_type == CONFLICTING and not self.entity_key:
            raise ConfigurationError("conflicting injection requires an entity key")


def inject(d: Dataset, spec: CorruptionSpec) -> Dataset:
    """Dispatch to the injector for spec.error_type."""
    if spec.error_type == MISSING:
        return inject_missing(d, spec)
    if spec.error_type == INCONSISTENT:
        return inject_inconsistent(d, spec)
    return inject_conflicting(d, spec)


def _eligible_feature_columns(d: Dataset, spec: CorruptionSpec) -> list[int]:
    cols = list(d.schema.feature_indices)
    if spec.corrupt_target_in_train and d.schema.target_index is not None:
        cols.append(d.schema.target_index)
    if spec.column_mask is not None:
        masked = {d.schema.index_of(n) for n in spec.column_mask}
        cols = [j for j in cols if j in masked]
    return cols


def _column_domain(d: Dataset, j: int) -> list[Cell]:
    seen: dict[Cell, None] = {}
    for row in d.rows:
        v = row[j]
        if v is not None and v not in seen:
            seen[v] = None
    return sorted(seen)


# ---------------------------------------------------------------------------
# missing
# ---------------------------------------------------------------------------

def inject_missing(d: Dataset, spec: CorruptionSpec) -> Dataset:
    """Delete exactly round(rate * eligible_cells) cells, chosen uniformly."""
    out = d.copy()
    cols = _eligible_feature_columns(d, spec)
    total = len(cols) * out.n_rows
    n_delete = int(round(spec.rate * total))
    if n_delete == 0:
        if spec.rate > 0 and total == 0:
            raise ConfigurationError("no eligible cells to delete")
        return out
    if total == 0:
        raise ConfigurationError("no eligible cells to delete")
    rng = np.random.default_rng(spec.seed)
    chosen = rng.choice(total, size=n_delete, replace=False)
    for flat in chosen:
        i, jpos = divmod(int(flat), len(cols))
        out.rows[i][cols[jpos]] = None
    return out


# ---------------------------------------------------------------------------
# inconsistent (FD violations)
# ---------------------------------------------------------------------------

class _FDIndex:
    """Incremental per-rule grouping with violated-group flag counts.

    Group iteration uses insertion-ordered dicts throughout so behavior is
    identical across process restarts.
    """

    def __init__(self, rows: list[list[Cell]], bindings: list[tuple[tuple[int, ...], int]]):
        self.rows = rows
        self.bindings = bindings
        self.groups: list[dict[tuple, list[int]]] = [dict() for _ in bindings]
        self.violated: list[dict[tuple, None]] = [dict() for _ in bindings]
        self.flag_count: dict[int, int] = {}
        for r in range(len(bindings)):
            for i in range(len(rows)):
                self._add(r, i)

    @property
    def flagged(self) -> int:
        return len(self.flag_count)

    def is_flagged(self, i: int) -> bool:
        return i in self.flag_count

    def key(self, r: int, i: int) -> tuple | None:
        lhs_idx, rhs_idx = self.bindings[r]
        vals = tuple(self.rows[i][j] for j in lhs_idx)
        if any(v is None for v in vals) or self.rows[i][rhs_idx] is None:
            return None
        return vals

    def _is_violated(self, r: int, key: tuple) -> bool:
        rhs_idx = self.bindings[r][1]
        return len({self.rows[i][rhs_idx] for i in self.groups[r].get(key, ())}) > 1

    def _flag(self, i: int):
        self.flag_count[i] = self.flag_count.get(i, 0) + 1

    def _unflag(self, i: int):
        self.flag_count[i] -= 1
        if self.flag_count[i] == 0:
            del self.flag_count[i]

    def _add(self, r: int, i: int):
        key = self.key(r, i)
        if key is None:
            return
        members = self.groups[r].setdefault(key, [])
        was = key in self.violated[r]
        members.append(i)
        now = self._is_violated(r, key)
        if now and was:
            self._flag(i)
        elif now and not was:
            self.violated[r][key] = None
            for m in members:
                self._flag(m)

    def _remove(self, r: int, i: int):
        key = self.key(r, i)
        if key is None:
            return
        members = self.groups[r][key]
        was = key in self.violated[r]
        members.remove(i)
        if not members:
            del self.groups[r][key]
            if was:
                del self.violated[r][key]
                self._unflag(i)
            return
        now = self._is_violated(r, key)
        if was and not now:
            del self.violated[r][key]
            self._unflag(i)
            for m in members:
                self._unflag(m)
        elif was and now:
            self._unflag(i)

    def set_cells(self, i: int, updates: dict[int, Cell]):
        affected = [
            r
            for r, (lhs_idx, rhs_idx) in enumerate(self.bindings)
            if any(j in updates for j in lhs_idx) or rhs_idx in updates
        ]
        for r in affected:
            self._remove(r, i)
        for j, v in updates.items():
            self.rows[i][j] = v
        for r in affected:
            self._add(r, i)


def inject_inconsistent(d: Dataset, spec: CorruptionSpec) -> Dataset:
    """Mutate rhs cells (fabricating lhs partners when needed) until the
    fraction of rows in FD-violating groups reaches round(rate * rows)."""
    out = d.copy()
    n = out.n_rows
    target = int(round(spec.rate * n))
    if target == 0:
        return out

    allowed = set(_eligible_feature_columns(d, spec)) | set(d.schema.key_indices)
    if spec.column_mask is not None:
        allowed &= {d.schema.index_of(nm) for nm in spec.column_mask}

    bindings = []
    domains = []
    for rule in spec.rules:
        lhs_idx, rhs_idx = rule.bind(d.schema)
        cols = set(lhs_idx) | {rhs_idx}
        if d.schema.target_index in cols and not spec.corrupt_target_in_train:
            continue
        if spec.column_mask is not None and not cols <= allowed:
            continue
        domain = _column_domain(d, rhs_idx)
        if len(domain) < 2:
            raise InjectionImpossibleError(
                f"rule {','.join(rule.lhs)} -> {rule.rhs}: rhs column has a single value"
            )
        bindings.append((lhs_idx, rhs_idx))
        domains.append(domain)
    if not bindings:
        raise ConfigurationError("no usable FD rule after applying column restrictions")

    rng = np.random.default_rng(spec.seed)
    index = _FDIndex(out.rows, bindings)
    guard = 0
    while index.flagged < target and guard < 20 * n + 100:
        guard += 1
        need = target - index.flagged
        r = int(rng.integers(len(bindings)))
        lhs_idx, rhs_idx = bindings[r]
        domain = domains[r]

        if need == 1:
            joined = _join_violated_fd(index, rng)
            if joined:
                continue

        perm = rng.permutation(n)
        # mutate a victim that shares its lhs with other rows
        victim = None
        for i in perm:
            i = int(i)
            if index.is_flagged(i):
                continue
            key = index.key(r, i)
            if key is None:
                continue
            members = index.groups[r][key]
            if len(members) < 2:
                continue
            gain = sum(1 for m in members if not index.is_flagged(m))
            if 1 <= gain <= need:
                victim = (i, key, members)
                break
        if victim is not None:
            i, key, members = victim
            current = {out.rows[m][rhs_idx] for m in members}
            options = [v for v in domain if v not in current]
            if options:
                pick = options[int(rng.integers(len(options)))]
                index.set_cells(i, {rhs_idx: pick})
                continue

        # fabricate a partner: copy the victim's lhs onto another row and
        # give that row a differing rhs value
        v_row = None
        for i in perm:
            i = int(i)
            if not index.is_flagged(i) and index.key(r, i) is not None:
                v_row = i
                break
        p_row = None
        if v_row is not None:
            v_key = index.key(r, v_row)
            group = index.groups[r][v_key]
            for i in perm:
                i = int(i)
                if i != v_row and not index.is_flagged(i) and i not in group:
                    p_row = i
                    break
        if v_row is None or p_row is None:
            continue
        v_rhs = out.rows[v_row][rhs_idx]
        options = [v for v in domain if v != v_rhs]
        pick = options[int(rng.integers(len(options)))]
        updates = {j: out.rows[v_row][j] for j in lhs_idx}
        updates[rhs_idx] = pick
        index.set_cells(p_row, updates)

    if index.flagged < target:
        raise InjectionImpossibleError(
            f"could not reach inconsistent rate {spec.rate} (reached {index.flagged}/{n} rows)"
        )
    return out


def _join_violated_fd(index: _FDIndex, rng: np.random.Generator) -> bool:
    """Attach one unflagged row to an already-violated group (+1 exactly)."""
    for r, viol in enumerate(index.violated):
        if not viol:
            continue
        key = next(iter(viol))
        lhs_idx, rhs_idx = index.bindings[r]
        members = index.groups[r][key]
        n = len(index.rows)
        for i in rng.permutation(n):
            i = int(i)
            if index.is_flagged(i) or i in members:
                continue
            updates = {j: kv for j, kv in zip(lhs_idx, key)}
            if index.rows[i][rhs_idx] is None:
                updates[rhs_idx] = index.rows[members[0]][rhs_idx]
            index.set_cells(i, updates)
            return True
    return False


# ---------------------------------------------------------------------------
# conflicting (entity disagreements)
# ---------------------------------------------------------------------------

class _EntityIndex:
    """Entity groups keyed by the entity-key tuple, with conflict flags."""

    def __init__(self, rows: list[list[Cell]], origin: list[int],
                 key_idx: tuple[int, ...], compare_idx: list[int]):
        self.rows = rows
        self.origin = origin
        self.key_idx = key_idx
        self.compare_idx = compare_idx
        self.groups: dict[tuple, list[int]] = {}
        self.violated: dict[tuple, None] = {}
        self.flag_count = 0
        for i in range(len(rows)):
            self._add(i)

    def key(self, i: int) -> tuple | None:
        vals = tuple(self.rows[i][j] for j in self.key_idx)
        if any(v is None for v in vals):
            return None
        return vals

    def _is_violated(self, key: tuple) -> bool:
        members = self.groups.get(key, ())
        for j in self.compare_idx:
            if len({self.rows[i][j] for i in members if self.rows[i][j] is not None}) > 1:
                return True
        return False

    def _add(self, i: int):
        key = self.key(i)
        if key is None:
            return
        members = self.groups.setdefault(key, [])
        was = key in self.violated
        members.append(i)
        if was:
            self.flag_count += 1
        elif self._is_violated(key):
            self.violated[key] = None
            self.flag_count += len(members)

    def refresh(self, key: tuple):
        """Re-evaluate one group after in-place cell mutation."""
        was = key in self.violated
        now = self._is_violated(key)
        if now and not was:
            self.violated[key] = None
            self.flag_count += len(self.groups[key])
        elif was and not now:
            del self.violated[key]
            self.flag_count -= len(self.groups[key])

    def append_duplicate(self, src: int) -> int:
        self.rows.append(list(self.rows[src]))
        self.origin.append(self.origin[src])
        i = len(self.rows) - 1
        self._add(i)
        return i


def inject_conflicting(d: Dataset, spec: CorruptionSpec) -> Dataset:
    """Disagree one non-key attribute inside entity groups (duplicating
    singleton entities first) until the conflicting-row fraction meets the
    rate against the final row count."""
    out = d.copy()
    key_idx = tuple(out.schema.index_of(nm) for nm in spec.entity_key)
    mutate_cols = [j for j in _eligible_feature_columns(d, spec) if j not in key_idx]
    compare_idx = [j for j in range(out.schema.arity) if j not in key_idx]
    if not compare_idx:
        raise ConfigurationError("all columns are key columns; nothing can conflict")

    domains = {j: _column_domain(d, j) for j in mutate_cols}
    usable_cols = [j for j in mutate_cols if len(domains[j]) >= 2]
    if not usable_cols and spec.rate > 0:
        raise InjectionImpossibleError("no non-key column has two distinct values")

    if int(round(spec.rate * out.n_rows)) == 0:
        return out

    rng = np.random.default_rng(spec.seed)
    index = _EntityIndex(out.rows, out.row_origin, key_idx, compare_idx)
    guard = 0
    while guard < 20 * out.n_rows + 100:
        guard += 1
        n = len(out.rows)
        target = int(round(spec.rate * n))
        if index.flag_count >= target:
            break
        need = target - index.flag_count

        if need == 1 and index.violated:
            key = next(iter(index.violated))
            index.append_duplicate(index.groups[key][0])
            continue

        perm = rng.permutation(n)
        mutated = False
        # conflict an existing multi-row entity group
        for i in perm:
            i = int(i)
            key = index.key(i)
            if key is None or key in index.violated:
                continue
            members = index.groups[key]
            if len(members) < 2 or len(members) > need:
                continue
            if _disagree_group(index, members, usable_cols, domains, rng):
                index.refresh(key)
                mutated = True
                break
        if mutated:
            continue
        # duplicate a singleton entity, then disagree the pair
        dup = None
        for i in perm:
            i = int(i)
            key = index.key(i)
            if key is None or key in index.violated:
                continue
            if len(index.groups[key]) == 1:
                dup = (i, key)
                break
        if dup is None:
            break
        i, key = dup
        copy_i = index.append_duplicate(i)
        if _disagree_group(index, [i, copy_i], usable_cols, domains, rng):
            index.refresh(key)

    final_target = int(round(spec.rate * len(out.rows)))
    if index.flag_count < final_target:
        raise InjectionImpossibleError(
            f"could not reach conflicting rate {spec.rate} "
            f"(reached {index.flag_count}/{len(out.rows)} rows)"
        )
    return out


def _disagree_group(index: _EntityIndex, members: list[int], usable_cols: list[int],
                    domains: dict[int, list[Cell]], rng: np.random.Generator) -> bool:
    """Make one attribute differ inside a currently-agreeing group."""
    if not usable_cols:
        return False
    col = usable_cols[int(rng.integers(len(usable_cols)))]
    holders = [i for i in members if index.rows[i][col] is not None]
    dom = domains[col]
    if len(holders) >= 2:
        # group agrees on one value; overwrite one holder with another value
        options = [v for v in dom if v != index.rows[holders[0]][col]]
        index.rows[holders[0]][col] = options[int(rng.integers(len(options)))]
    elif len(holders) == 1:
        victim = next(i for i in members if i != holders[0])
        options = [v for v in dom if v != index.rows[holders[0]][col]]
        index.rows[victim][col] = options[int(rng.integers(len(options)))]
    else:
        index.rows[members[0]][col] = dom[0]
        index.rows[members[1]][col] = dom[1]
    return True


# ---------------------------------------------------------------------------
# imputation
# ---------------------------------------------------------------------------

def impute(d: Dataset) -> Dataset:
    """Fill numeric gaps with the column mean, categorical ones with the mode.

    Mode ties break toward the first-seen value.  A column that is entirely
    missing raises ImputationImpossibleError naming it.
    """
    if not d.has_missing():
        return d.copy()
    out = d.copy()
    for j, col in enumerate(out.schema.columns):
        holes = [i for i in range(out.n_rows) if out.rows[i][j] is None]
        if not holes:
            continue
        present = [out.rows[i][j] for i in range(out.n_rows) if out.rows[i][j] is not None]
        if not present:
            raise ImputationImpossibleError(f"column {col.name!r} is entirely missing")
        if col.kind == NUMERIC:
            fill: Cell = float(sum(present)) / len(present)
        else:
            counts: dict[Cell, int] = {}
            for v in present:
                counts[v] = counts.get(v, 0) + 1
            fill = max(counts, key=counts.get)  # dict order keeps first-seen on ties
        for i in holes:
            out.rows[i][j] = fill
    return out
