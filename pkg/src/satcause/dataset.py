"""Tabular clause-snapshot data: schema, CSV I/O, transforms and fold plans."""

from __future__ import annotations

import csv
import math
import operator
import re
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadFoldCount,
    DataError,
    EmptyFile,
    EmptyResult,
    MissingColumn,
    NonNumericCell,
    UnknownCategory,
    UnknownColumn,
    ZeroVariance,
)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str = CONTINUOUS
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise ValueError(f"unknown column kind {self.kind!r}")
        object.__setattr__(self, "categories", tuple(self.categories))
        if self.kind == CATEGORICAL:
            if len(self.categories) < 2:
                raise ValueError(f"categorical column {self.name!r} needs at least 2 categories")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"duplicate categories in column {self.name!r}")
        elif self.categories:
            raise ValueError(f"continuous column {self.name!r} cannot list categories")

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    def dummy_names(self) -> list[str]:
        """Indicator column names; the first category is the all-zeros reference."""
        return [f"{self.name}={c}" for c in self.categories[1:]]


BRANCHING = ColumnSchema("Branching", CATEGORICAL, ("VSIDS", "Maple"))
RESTART = ColumnSchema("Restart", CATEGORICAL, ("LBD-based", "Geometric", "Luby"))

#: The ten clause-level features recorded during solving.
SAT_SCHEMA: tuple[ColumnSchema, ...] = (
    BRANCHING,
    RESTART,
    ColumnSchema("Size"),
    ColumnSchema("LBD"),
    ColumnSchema("Activity"),
    ColumnSchema("UIP"),
    ColumnSchema("Propagation"),
    ColumnSchema("LastTouch"),
    ColumnSchema("Time"),
    ColumnSchema("Utility"),
)


def schema_to_json(schema: Sequence[ColumnSchema]) -> list[dict]:
    return [
        {"name": c.name, "kind": c.kind, **({"categories": list(c.categories)} if c.is_categorical else {})}
        for c in schema
    ]


def schema_from_json(doc: Sequence[Mapping]) -> tuple[ColumnSchema, ...]:
    try:
        return tuple(ColumnSchema(c["name"], c.get("kind", CONTINUOUS), tuple(c.get("categories", ()))) for c in doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"bad schema: {exc}") from None

def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """Immutable column-oriented table.

    Continuous columns are float64 arrays; categorical columns are int64
    arrays of category codes (indices into ``ColumnSchema.categories``).
    """

    schema: tuple[ColumnSchema, ...]
    columns: Mapping[str, np.ndarray]
    provenance: str = ""
    _index: Mapping[str, ColumnSchema] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        schema = tuple(self.schema)
        names = [c.name for c in schema]
        if len(set(names)) != len(names):
            raise DataError("duplicate column names in schema")
        if set(self.columns) != set(names):
            extra = set(self.columns) - set(names)
            if extra:
                raise UnknownColumn(sorted(extra)[0])
            raise MissingColumn(sorted(set(names) - set(self.columns))[0])
        cols = {}
        n = None
        for c in schema:
            a = np.asarray(self.columns[c.name])
            if a.ndim != 1:
                raise DataError(f"column {c.name!r} is not one-dimensional")
            if n is None:
                n = len(a)
            elif len(a) != n:
                raise DataError(f"column {c.name!r} has {len(a)} rows, expected {n}")
            if c.is_categorical:
                a = a.astype(np.int64)
                if len(a) and (a.min() < 0 or a.max() >= len(c.categories)):
                    raise DataError(f"column {c.name!r} has out-of-range category codes")
            else:
                a = a.astype(np.float64)
                if not np.all(np.isfinite(a)):
                    raise DataError(f"column {c.name!r} has non-finite values")
            cols[c.name] = _readonly(a)
        if not n:
            raise DataError("a dataset needs at least one row")
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "columns", MappingProxyType(cols))
        object.__setattr__(self, "_index", MappingProxyType({c.name: c for c in schema}))

    @property
    def n(self) -> int:
        return len(next(iter(self.columns.values())))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.schema]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def column_schema(self, name: str) -> ColumnSchema:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownColumn(name) from None

    def __getitem__(self, name: str) -> np.ndarray:
        self.column_schema(name)
        return self.columns[name]

    def labels(self, name: str) -> np.ndarray:
        """Category labels of a categorical column as a string array."""
        c = self.column_schema(name)
        if not c.is_categorical:
            raise DataError(f"column {name!r} is not categorical")
        return np.asarray(c.categories, dtype=object)[self.columns[name]]

    def take(self, rows) -> Dataset:
        rows = np.asarray(rows)
        return Dataset(self.schema, {k: v[rows] for k, v in self.columns.items()}, self.provenance)

    def with_column(self, column: ColumnSchema, values, *, replace: bool = False) -> Dataset:
        """Return a copy with ``column`` appended (or replaced in place)."""
        schema = list(self.schema)
        cols = dict(self.columns)
        if column.name in self._index:
            if not replace:
                raise DataError(f"column {column.name!r} already exists")
            schema[[c.name for c in schema].index(column.name)] = column
        else:
            schema.append(column)
        cols[column.name] = values
        return Dataset(tuple(schema), cols, self.provenance)

    def select(self, names: Sequence[str]) -> Dataset:
        schema = tuple(self.column_schema(n) for n in names)
        return Dataset(schema, {n: self.columns[n] for n in names}, self.provenance)


# -- CSV ---------------------------------------------------------------------


def load_csv(path, schema: Sequence[ColumnSchema] = SAT_SCHEMA) -> Dataset:
    """Read a header-first CSV and validate every cell against ``schema``.

    Column order in the file does not matter, but the header must name
    exactly the schema columns. Row numbers in errors are 1-based data rows.
    """
    path = Path(path)
    schema = tuple(schema)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        rows = [r for r in reader if r]
    wanted = [c.name for c in schema]
    for name in wanted:
        if name not in header:
            raise MissingColumn(name)
    for name in header:
        if name not in wanted:
            raise UnknownColumn(name)
    if len(set(header)) != len(header):
        raise DataError("duplicate header names")
    if not rows:
        raise EmptyFile(f"{path} has a header but no data rows")

    pos = {h: i for i, h in enumerate(header)}
    cols: dict[str, np.ndarray] = {}
    for c in schema:
        j = pos[c.name]
        if c.is_categorical:
            code = {cat: i for i, cat in enumerate(c.categories)}
            out = np.empty(len(rows), dtype=np.int64)
            for i, r in enumerate(rows, 1):
                v = _cell(r, j, i, len(header)).strip()
                if v not in code:
                    raise UnknownCategory(i, c.name, v)
                out[i - 1] = code[v]
        else:
            out = np.empty(len(rows), dtype=np.float64)
            for i, r in enumerate(rows, 1):
                v = _cell(r, j, i, len(header)).strip()
                try:
                    x = float(v)
                except ValueError:
                    raise NonNumericCell(i, c.name, v) from None
                if not math.isfinite(x):
                    raise NonNumericCell(i, c.name, v)
                out[i - 1] = x
        cols[c.name] = out
    return Dataset(schema, cols, provenance=str(path))


def _cell(row: list[str], j: int, i: int, width: int) -> str:
    if len(row) != width:
        raise DataError(f"row {i} has {len(row)} cells, expected {width}")
    return row[j]


def write_csv(d: Dataset, path) -> None:
    """Write ``d`` so that :func:`load_csv` reproduces it exactly."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(d.names)
        cols = []
        for c in d.schema:
            if c.is_categorical:
                cols.append(d.labels(c.name))
            else:
                cols.append([_fmt(x) for x in d.columns[c.name]])
        w.writerows(zip(*cols))


def _fmt(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


# -- transforms --------------------------------------------------------------


def normalize_standard_score(
    d: Dataset, columns: Iterable[str] | None = None
) -> tuple[Dataset, dict[str, tuple[float, float]]]:
    """Standard-score every continuous column (population stddev).

    Returns the transformed dataset and ``{column: (mean, stddev)}`` so the
    transform can be inverted.
    """
    targets = [c.name for c in d.schema if not c.is_categorical] if columns is None else list(columns)
    params = {}
    cols = dict(d.columns)
    for name in targets:
        if d.column_schema(name).is_categorical:
            raise DataError(f"cannot normalize categorical column {name!r}")
        x = d.columns[name]
        mean = float(x.mean())
        std = float(x.std())
        if not std > 0 or std <= 1e-12 * max(1.0, abs(mean)):
            raise ZeroVariance(name)
        cols[name] = (x - mean) / std
        params[name] = (mean, std)
    return Dataset(d.schema, cols, d.provenance), params


def encode_categoricals(d: Dataset) -> Dataset:
    """Replace each categorical column by reference-coded 0/1 indicators."""
    if not any(c.is_categorical for c in d.schema):
        return d
    schema, cols = [], {}
    for c in d.schema:
        if c.is_categorical:
            codes = d.columns[c.name]
            for k, name in enumerate(c.dummy_names(), start=1):
                schema.append(ColumnSchema(name))
                cols[name] = (codes == k).astype(np.float64)
        else:
            schema.append(c)
            cols[c.name] = d.columns[c.name]
    return Dataset(tuple(schema), cols, d.provenance)


def design_columns(d: Dataset, names: Sequence[str]) -> tuple[list[str], np.ndarray]:
    """Numeric design block for ``names``; categoricals expand to their dummies."""
    out_names, blocks = [], []
    for name in names:
        c = d.column_schema(name)
        if c.is_categorical:
            codes = d.columns[name]
            for k, dn in enumerate(c.dummy_names(), start=1):
                out_names.append(dn)
                blocks.append((codes == k).astype(np.float64))
        else:
            out_names.append(name)
            blocks.append(d.columns[name])
    if not blocks:
        return [], np.empty((d.n, 0))
    return out_names, np.column_stack(blocks)


# -- folds -------------------------------------------------------------------


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray

    def sizes(self) -> list[int]:
        return np.bincount(self.assignment, minlength=self.k).tolist()

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train_rows, test_rows) for one fold."""
        test = self.assignment == fold
        return np.flatnonzero(~test), np.flatnonzero(test)


def kfold_split(n: int, k: int, seed: int) -> FoldPlan:
    if not 2 <= k <= n:
        raise BadFoldCount(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    assignment[perm] = np.arange(n) % k
    return FoldPlan(k, _readonly(assignment))


# -- filtering ---------------------------------------------------------------

_OPS = {
    "<=": operator.le,
    "<": operator.lt,
    ">=": operator.ge,
    ">": operator.gt,
    "=": operator.eq,
    "!=": operator.ne,
}
_ALIASES = {"≤": "<=", "≥": ">=", "≠": "!=", "==": "="}
_PRED_RE = re.compile(r"^\s*([A-Za-z_][\w\-]*?)\s*(<=|>=|!=|==|≤|≥|≠|<|>|=)\s*(\S.*?)\s*$")


@dataclass(frozen=True)
class Predicate:
    """Single-column comparison such as ``LBD <= 6`` or ``Branching = Maple``."""

    column: str
    op: str
    value: float | str

    def __post_init__(self):
        op = _ALIASES.get(self.op, self.op)
        if op not in _OPS:
            raise ValueError(f"unknown comparison {self.op!r}")
        object.__setattr__(self, "op", op)

    def __str__(self) -> str:
        v = self.value if isinstance(self.value, str) else _fmt(self.value)
        return f"{self.column} {self.op} {v}"

    def mask(self, d: Dataset) -> np.ndarray:
        c = d.column_schema(self.column)
        fn = _OPS[self.op]
        if c.is_categorical:
            if self.op not in ("=", "!="):
                raise DataError(f"operator {self.op} is not defined for categorical column {c.name!r}")
            if str(self.value) not in c.categories:
                raise UnknownCategory(0, c.name, str(self.value))
            return fn(d.columns[c.name], c.categories.index(str(self.value)))
        if isinstance(self.value, str):
            raise DataError(f"continuous column {c.name!r} compared with label {self.value!r}")
        return fn(d.columns[c.name], float(self.value))


def parse_predicate(text: str) -> Predicate:
    m = _PRED_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse predicate {text!r}")
    col, op, raw = m.groups()
    try:
        value: float | str = float(raw)
    except ValueError:
        value = raw
    return Predicate(col, op, value)


def filter_rows(d: Dataset, predicate: Predicate | str) -> Dataset:
    if isinstance(predicate, str):
        predicate = parse_predicate(predicate)
    mask = predicate.mask(d)
    if not mask.any():
        raise EmptyResult(str(predicate))
    return d.take(np.flatnonzero(mask))
