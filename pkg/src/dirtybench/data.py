"""Typed tabular datasets: loading, schema inference, FD rules, error-rate detection.

Cells are plain Python values: ``float`` for numeric columns, ``str`` for
categorical ones, and ``None`` as the dedicated missing marker (serialized as
an empty field).  A loaded dataset keeps an immutable ``clean_shadow`` copy of
its rows so that later corruption can always be measured against ground truth.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    ConfigurationError,
    EmptyInputError,
    ParseError,
    RuleError,
    SchemaError,
)

Cell = float | str | None

NUMERIC = "numeric"
CATEGORICAL = "categorical"

FEATURE = "feature"
TARGET = "target"
KEY = "key"


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # numeric | categorical
    role: str = FEATURE  # feature | target | key

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"unknown column kind {self.kind!r}")
        if self.role not in (FEATURE, TARGET, KEY):
            raise SchemaError(f"unknown column role {self.role!r}")


@dataclass(frozen=True)
class Schema:
    columns: tuple[Column, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("column names must be unique")
        if sum(c.role == TARGET for c in self.columns) > 1:
            raise SchemaError("at most one target column allowed")
        if not self.feature_indices:
            raise SchemaError("schema needs at least one feature column")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    @property
    def arity(self) -> int:
        return len(self.columns)

    @property
    def n(self) -> int:
        """Number of feature columns."""
        return len(self.feature_indices)

    @property
    def feature_indices(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.columns) if c.role == FEATURE)

    @property
    def key_indices(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.columns) if c.role == KEY)

    @property
    def target_index(self) -> int | None:
        for i, c in enumerate(self.columns):
            if c.role == TARGET:
                return i
        return None

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise SchemaError(f"unknown column {name!r}")


@dataclass(frozen=True)
class FDRule:
    """Consistency rule ``lhs1,lhs2 -> rhs``: the lhs values determine rhs."""

    lhs: tuple[str, ...]
    rhs: str

    def __post_init__(self):
        if not self.lhs:
            raise RuleError("rule needs a non-empty left-hand side")
        if self.rhs in self.lhs:
            raise RuleError(f"rule rhs {self.rhs!r} appears in its own lhs")

    def bind(self, schema: Schema) -> tuple[tuple[int, ...], int]:
        """Resolve column names to indices; raises RuleError on unknown names."""
        try:
            lhs_idx = tuple(schema.index_of(n) for n in self.lhs)
            rhs_idx = schema.index_of(self.rhs)
        except SchemaError as exc:
            raise RuleError(f"cannot bind rule {self}: {exc}") from exc
        return lhs_idx, rhs_idx


@dataclass
class Dataset:
    """Rows plus schema, FD rules, and the protected clean copy.

    ``row_origin[i]`` is the index into ``clean_shadow`` that row ``i``
    descends from; corruption that duplicates rows extends it, so ground
    truth stays addressable for every live row.
    """

    schema: Schema
    rows: list[list[Cell]]
    clean_shadow: tuple[tuple[Cell, ...], ...]
    provenance: tuple[str, str] = ("<memory>", "")
    rules: tuple[FDRule, ...] = ()
    row_origin: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.row_origin:
            self.row_origin = list(range(len(self.rows)))
        for i, row in enumerate(self.rows):
            if len(row) != self.schema.arity:
                raise SchemaError(
                    f"row {i} has {len(row)} cells, schema expects {self.schema.arity}"
                )

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def source(self) -> str:
        return self.provenance[0]

    @property
    def content_hash(self) -> str:
        return self.provenance[1]

    def has_missing(self) -> bool:
        return any(cell is None for row in self.rows for cell in row)

    def labels(self) -> list[Cell]:
        """Clean target values in row order (from the protected copy)."""
        t = self.schema.target_index
        if t is None:
            raise SchemaError("dataset has no target column")
        return [self.clean_shadow[o][t] for o in self.row_origin]

    def label_values(self) -> list[Cell]:
        """Distinct clean target values in first-seen order."""
        seen: dict[Cell, None] = {}
        for v in self.labels():
            if v is not None and v not in seen:
                seen[v] = None
        return list(seen)

    @property
    def n_c(self) -> int:
        return len(self.label_values())

    def with_rows(self, rows: list[list[Cell]], row_origin: list[int] | None = None) -> "Dataset":
        """New dataset sharing schema/shadow/rules but carrying changed rows."""
        return Dataset(
            schema=self.schema,
            rows=rows,
            clean_shadow=self.clean_shadow,
            provenance=self.provenance,
            rules=self.rules,
            row_origin=list(row_origin) if row_origin is not None else list(self.row_origin),
        )

    def copy(self) -> "Dataset":
        return self.with_rows([list(r) for r in self.rows])

    def attach_rules(self, rules: Iterable[FDRule]) -> "Dataset":
        bound = tuple(rules)
        for r in bound:
            r.bind(self.schema)  # validates names
        return replace(self, rules=bound)


# ---------------------------------------------------------------------------
# parsing and serialization
# ---------------------------------------------------------------------------

def _parse_cell(token: str, kind: str) -> Cell:
    token = token.strip()
    if token == "":
        return None
    if kind == NUMERIC:
        try:
            value = float(token)
        except ValueError as exc:
            raise ParseError(f"non-numeric token {token!r} in numeric column") from exc
        if value != value or value in (float("inf"), float("-inf")):
            raise ParseError(f"non-finite numeric token {token!r}")
        return value
    return token


def _token_is_numeric(token: str) -> bool:
    try:
        v = float(token)
    except ValueError:
        return False
    return v == v and v not in (float("inf"), float("-inf"))


def format_cell(cell: Cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, float):
        if cell == int(cell) and abs(cell) < 1e15:
            return str(int(cell))
        return repr(cell)
    return str(cell)


def _split_line(line: str, delimiter: str) -> list[str]:
    return [f.strip() for f in line.rstrip("\r\n").split(delimiter)]


def infer_schema(
    header: Sequence[str] | None,
    raw_rows: Sequence[Sequence[str]],
    target: str | None = None,
    keys: Sequence[str] = (),
) -> Schema:
    """A column is numeric iff every non-missing token parses as a finite real."""
    width = len(raw_rows[0]) if raw_rows else (len(header) if header else 0)
    names = list(header) if header else [f"c{i}" for i in range(width)]
    kinds = []
    for j in range(width):
        tokens = [r[j] for r in raw_rows if r[j] != ""]
        kinds.append(NUMERIC if tokens and all(_token_is_numeric(t) for t in tokens) else CATEGORICAL)
    roles = []
    for name in names:
        if target is not None and name == target:
            roles.append(TARGET)
        elif name in keys:
            roles.append(KEY)
        else:
            roles.append(FEATURE)
    if target is not None and TARGET not in roles:
        raise SchemaError(f"target column {target!r} not found in {names}")
    return Schema(tuple(Column(n, k, r) for n, k, r in zip(names, kinds, roles)))


def load_dataset(
    path: str | Path,
    schema_hint: Schema | None = None,
    delimiter: str = ",",
    has_header: bool = True,
    target: str | None = None,
    keys: Sequence[str] = (),
) -> Dataset:
    """Load a delimited text file into a typed Dataset.

    Without ``schema_hint`` the schema is inferred from the file; ``target``
    and ``keys`` assign column roles.  Raises ParseError on malformed rows,
    EmptyInputError when no data rows exist.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    header: list[str] | None = None
    if has_header:
        if not lines:
            raise EmptyInputError(f"{path}: file is empty")
        header = _split_line(lines[0], delimiter)
        lines = lines[1:]
    if not lines:
        raise EmptyInputError(f"{path}: no data rows")

    raw_rows = []
    width = len(header) if header else len(_split_line(lines[0], delimiter))
    for lineno, line in enumerate(lines, start=2 if has_header else 1):
        fields = _split_line(line, delimiter)
        if len(fields) != width:
            raise ParseError(
                f"{path}: line {lineno} has {len(fields)} fields, expected {width}"
            )
        raw_rows.append(fields)

    if schema_hint is not None:
        schema = schema_hint
        if schema.arity != width:
            raise SchemaError(
                f"schema hint arity {schema.arity} does not match file width {width}"
            )
    else:
        schema = infer_schema(header, raw_rows, target=target, keys=keys)

    rows: list[list[Cell]] = []
    for lineno, fields in enumerate(raw_rows, start=2 if has_header else 1):
        try:
            rows.append([_parse_cell(tok, col.kind) for tok, col in zip(fields, schema.columns)])
        except ParseError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from exc

    shadow = tuple(tuple(r) for r in rows)
    digest = content_hash(schema, rows, delimiter)
    return Dataset(
        schema=schema,
        rows=[list(r) for r in rows],
        clean_shadow=shadow,
        provenance=(str(path), digest),
    )


def dataset_to_text(d: Dataset, delimiter: str = ",", header: bool = True) -> str:
    lines = []
    if header:
        lines.append(delimiter.join(d.schema.names))
    for row in d.rows:
        lines.append(delimiter.join(format_cell(c) for c in row))
    return "\n".join(lines) + "\n"


def save_dataset(d: Dataset, path: str | Path, delimiter: str = ",", header: bool = True) -> None:
    Path(path).write_text(dataset_to_text(d, delimiter, header), encoding="utf-8")


def content_hash(schema: Schema, rows: Sequence[Sequence[Cell]], delimiter: str = ",") -> str:
    """Hash over the canonical emitted text: trimmed fields, LF endings."""
    canonical = delimiter.join(schema.names) + "\n"
    canonical += "\n".join(delimiter.join(format_cell(c) for c in row) for row in rows)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def dataset_from_rows(
    columns: Schema | Sequence[Column],
    rows: Sequence[Sequence[Cell]],
    rules: Iterable[FDRule] = (),
    source: str = "<memory>",
) -> Dataset:
    """Build a Dataset from in-memory values (ints coerced to float)."""
    schema = columns if isinstance(columns, Schema) else Schema(tuple(columns))
    typed: list[list[Cell]] = []
    for i, row in enumerate(rows):
        if len(row) != schema.arity:
            raise SchemaError(f"row {i} has {len(row)} cells, schema expects {schema.arity}")
        cells: list[Cell] = []
        for cell, col in zip(row, schema.columns):
            if cell is None:
                cells.append(None)
            elif col.kind == NUMERIC:
                value = float(cell)
                if value != value or value in (float("inf"), float("-inf")):
                    raise SchemaError(f"non-finite value in numeric column {col.name!r}")
                cells.append(value)
            else:
                cells.append(str(cell))
        typed.append(cells)
    if not typed:
        raise EmptyInputError("no rows supplied")
    shadow = tuple(tuple(r) for r in typed)
    digest = content_hash(schema, typed)
    d = Dataset(schema=schema, rows=typed, clean_shadow=shadow, provenance=(source, digest))
    return d.attach_rules(rules) if rules else d


def parse_fd_rules(text: str) -> list[FDRule]:
    """Parse rules of the form ``A,B -> C``, one per line; blank lines skipped."""
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "->" not in line:
            raise RuleError(f"line {lineno}: expected 'lhs1,lhs2 -> rhs', got {line!r}")
        lhs_text, rhs_text = line.split("->", 1)
        lhs = tuple(t.strip() for t in lhs_text.split(",") if t.strip())
        rhs = rhs_text.strip()
        if not rhs or "," in rhs:
            raise RuleError(f"line {lineno}: rule needs exactly one rhs column")
        rules.append(FDRule(lhs=lhs, rhs=rhs))
    return rules


# ---------------------------------------------------------------------------
# error-rate detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorRates:
    missing: float
    inconsistent: float
    conflicting: float

    def as_dict(self) -> dict[str, float]:
        return {
            "missing": self.missing,
            "inconsistent": self.inconsistent,
            "conflicting": self.conflicting,
        }


def missing_cell_rate(d: Dataset) -> float:
    """Missing feature cells divided by total feature cells."""
    cols = d.schema.feature_indices
    total = len(cols) * d.n_rows
    if total == 0:
        return 0.0
    miss = sum(1 for row in d.rows for j in cols if row[j] is None)
    return miss / total


def inconsistent_rows(d: Dataset, rules: Sequence[FDRule]) -> set[int]:
    """Indices of rows that share FD lhs values with differing rhs values."""
    if not rules:
        raise ConfigurationError("inconsistent detection requires at least one FD rule")
    flagged: set[int] = set()
    for rule in rules:
        lhs_idx, rhs_idx = rule.bind(d.schema)
        groups: dict[tuple, list[int]] = {}
        for i, row in enumerate(d.rows):
            lhs_vals = tuple(row[j] for j in lhs_idx)
            if any(v is None for v in lhs_vals) or row[rhs_idx] is None:
                continue
            groups.setdefault(lhs_vals, []).append(i)
        for members in groups.values():
            if len({d.rows[i][rhs_idx] for i in members}) > 1:
                flagged.update(members)
    return flagged


def inconsistent_row_rate(d: Dataset, rules: Sequence[FDRule]) -> float:
    if d.n_rows == 0:
        return 0.0
    return len(inconsistent_rows(d, rules)) / d.n_rows


def conflicting_rows(d: Dataset, entity_key: Sequence[str]) -> set[int]:
    """Indices of rows whose entity group disagrees on some non-key attribute."""
    if not entity_key:
        raise ConfigurationError("conflicting detection requires an entity key")
    key_idx = tuple(d.schema.index_of(n) for n in entity_key)
    other_idx = [j for j in range(d.schema.arity) if j not in key_idx]
    if not other_idx:
        raise ConfigurationError("all columns are key columns; nothing can conflict")
    groups: dict[tuple, list[int]] = {}
    for i, row in enumerate(d.rows):
        key_vals = tuple(row[j] for j in key_idx)
        if any(v is None for v in key_vals):
            continue
        groups.setdefault(key_vals, []).append(i)
    flagged: set[int] = set()
    for members in groups.values():
        if len(members) < 2:
            continue
        for j in other_idx:
            if len({d.rows[i][j] for i in members if d.rows[i][j] is not None}) > 1:
                flagged.update(members)
                break
    return flagged


def conflicting_row_rate(d: Dataset, entity_key: Sequence[str]) -> float:
    if d.n_rows == 0:
        return 0.0
    return len(conflicting_rows(d, entity_key)) / d.n_rows


def detect_error_rates(
    d: Dataset,
    rules: Sequence[FDRule] | None = None,
    entity_key: Sequence[str] | None = None,
) -> ErrorRates:
    """Measure all three dirty-data rates.

    ``rules`` defaults to the dataset's attached rules, ``entity_key`` to the
    schema's key columns.  A rate whose prerequisite is absent reads as 0.
    """
    if rules is None:
        rules = d.rules
    if entity_key is None:
        entity_key = tuple(d.schema.columns[j].name for j in d.schema.key_indices)
    inconsistent = inconsistent_row_rate(d, rules) if rules else 0.0
    conflicting = conflicting_row_rate(d, entity_key) if entity_key else 0.0
    return ErrorRates(missing_cell_rate(d), inconsistent, conflicting)
