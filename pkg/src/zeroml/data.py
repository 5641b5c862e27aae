"""Tabular data: CSV loading, cleaning, feature schemas and fold construction.

A :class:`Dataset` is immutable. Every transformation returns a new one;
numpy buffers inside it are marked read-only so they can be shared freely
between search workers.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
import threading
import warnings
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import CleanError, CsvError, FoldError, SchemaError

MISSING_DROP_THRESHOLD = 0.5

_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")


class ColumnType(Enum):
    NUMERIC = "Numeric"
    CATEGORICAL = "Categorical"
    BOOLEAN = "Boolean"


def parse_number(cell: str) -> float | None:
    if not _NUMBER.fullmatch(cell):
        return None
    value = float(cell)
    return value if np.isfinite(value) else None


def number_text(value: float) -> str:
    """Canonical text for a numeric cell; integral values drop the ``.0``."""
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Column:
    name: str
    ctype: ColumnType
    values: Union[np.ndarray, tuple]  # float64 / bool array, or tuple of str for categorical
    missing: np.ndarray               # bool mask, True where the cell was empty

    def __len__(self) -> int:
        return len(self.missing)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Column):
            return NotImplemented
        if (self.name, self.ctype) != (other.name, other.ctype):
            return False
        if not np.array_equal(self.missing, other.missing):
            return False
        if self.ctype is ColumnType.CATEGORICAL:
            return self.values == other.values
        return np.array_equal(self.values, other.values)

    __hash__ = None

    def take(self, rows: np.ndarray) -> "Column":
        if self.ctype is ColumnType.CATEGORICAL:
            values = tuple(self.values[i] for i in rows)
        else:
            values = _frozen(self.values[rows])
        return Column(self.name, self.ctype, values, _frozen(self.missing[rows]))

    def numeric(self) -> np.ndarray:
        """Values as float64; missing cells hold 0.0. Categorical cells must parse."""
        if self.ctype is ColumnType.NUMERIC:
            return self.values
        if self.ctype is ColumnType.BOOLEAN:
            return self.values.astype(np.float64)
        out = np.zeros(len(self), dtype=np.float64)
        for i, cell in enumerate(self.values):
            if self.missing[i]:
                continue
            value = parse_number(cell)
            if value is None:
                raise SchemaError(f"column '{self.name}' must be numeric, found {cell!r}")
            out[i] = value
        return out

    def text(self) -> tuple[str, ...]:
        """Values as strings; missing cells hold ''."""
        if self.ctype is ColumnType.CATEGORICAL:
            return self.values
        if self.ctype is ColumnType.BOOLEAN:
            return tuple("" if m else ("true" if v else "false")
                         for v, m in zip(self.values, self.missing))
        return tuple("" if m else number_text(v) for v, m in zip(self.values, self.missing))


@dataclass(frozen=True, eq=False)
class Dataset:
    columns: tuple[Column, ...]
    n_rows: int

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        for c in self.columns:
            if len(c) != self.n_rows:
                raise ValueError(f"column '{c.name}' has {len(c)} rows, expected {self.n_rows}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.n_rows == other.n_rows and self.columns == other.columns

    __hash__ = None

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column named '{name}' (columns: {', '.join(self.names)})")

    def has(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def take(self, rows: Sequence[int]) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(tuple(c.take(rows) for c in self.columns), len(rows))

    def summary(self) -> str:
        return f"Dataset({self.n_rows} rows x {len(self.columns)} columns)"

    @classmethod
    def from_cells(cls, header: Sequence[str], rows: Sequence[Sequence[str]],
                   categorical: Iterable[str] = ()) -> "Dataset":
        """Build a typed dataset from trimmed string cells ('' = missing).

        Names in ``categorical`` skip inference and are always Categorical.
        """
        forced = set(categorical)
        n = len(rows)
        columns = []
        for j, name in enumerate(header):
            cells = [row[j] for row in rows]
            columns.append(_infer_column(name, cells, name in forced))
        return cls(tuple(columns), n)

    @classmethod
    def from_records(cls, records: Sequence[dict], names: Sequence[str],
                     categorical: Iterable[str] = ()) -> "Dataset":
        """Build a dataset from JSON-style row objects, keeping only ``names``."""
        rows = [[_record_cell(rec.get(name)) for name in names] for rec in records]
        return cls.from_cells(list(names), rows, categorical)


def _record_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value) if isinstance(value, float) else str(value)
    if isinstance(value, str):
        return value.strip()
    raise SchemaError(f"unsupported cell value {value!r}")


def _infer_column(name: str, cells: list[str], force_categorical: bool = False) -> Column:
    missing = np.array([c == "" for c in cells], dtype=bool)
    present = [c for c in cells if c != ""]
    if not force_categorical:
        parsed = [parse_number(c) for c in present]
        if all(v is not None for v in parsed):
            values = np.zeros(len(cells), dtype=np.float64)
            it = iter(parsed)
            for i, m in enumerate(missing):
                if not m:
                    values[i] = next(it)
            return Column(name, ColumnType.NUMERIC, _frozen(values), _frozen(missing))
        if all(c.lower() in ("true", "false") for c in present):
            values = np.array([c.lower() == "true" for c in cells], dtype=bool)
            return Column(name, ColumnType.BOOLEAN, _frozen(values), _frozen(missing))
    return Column(name, ColumnType.CATEGORICAL, tuple(cells), _frozen(missing))


def load_csv(path: Union[str, Path], categorical: Iterable[str] = ()) -> Dataset:
    """Read a comma-separated file whose first row is the header.

    Cells are whitespace-trimmed before typing; empty cells are missing.
    Raises FileNotFoundError, or CsvError on a ragged row or duplicate header.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            rows = [row for row in reader if row]
        except csv.Error as exc:
            raise CsvError(reader.line_num, str(exc)) from exc
    if not rows:
        raise CsvError(1, "missing header row")
    header = [h.strip() for h in rows[0]]
    seen = set()
    for h in header:
        if h in seen:
            raise CsvError(1, f"duplicate column name '{h}'")
        if h == "":
            raise CsvError(1, "empty column name")
        seen.add(h)
    body = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise CsvError(i, f"expected {len(header)} fields, found {len(row)}")
        body.append([cell.strip() for cell in row])
    return Dataset.from_cells(header, body, categorical)


def write_csv(d: Dataset, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(d.names)
    texts = [c.text() for c in d.columns]
    for i in range(d.n_rows):
        writer.writerow([t[i] for t in texts])


# -- cleaning ----------------------------------------------------------------

def _mode(values: Iterable) -> object:
    counts = Counter(values)
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def _impute(col: Column) -> Column:
    if not col.missing.any():
        return col
    keep = ~col.missing
    no_missing = _frozen(np.zeros(len(col), dtype=bool))
    if col.ctype is ColumnType.NUMERIC:
        fill = float(np.mean(col.values[keep]))
        values = np.where(col.missing, fill, col.values)
        return Column(col.name, col.ctype, _frozen(values), no_missing)
    if col.ctype is ColumnType.BOOLEAN:
        fill = _mode(bool(v) for v in col.values[keep])
        values = np.where(col.missing, fill, col.values)
        return Column(col.name, col.ctype, _frozen(values), no_missing)
    fill = _mode(v for v, m in zip(col.values, col.missing) if not m)
    values = tuple(fill if m else v for v, m in zip(col.values, col.missing))
    return Column(col.name, col.ctype, values, no_missing)


def clean(d: Dataset, target: str | None = None) -> Dataset:
    """DataCleaner: drop mostly-missing columns and impute the rest.

    Columns with more than half their cells missing are dropped (the target,
    when named, is never dropped). Numeric gaps get the column mean,
    categorical and boolean gaps the mode, ties going to the smallest value.
    """
    if d.n_rows == 0:
        raise CleanError("dataset has no rows")
    kept = []
    for col in d.columns:
        frac = float(col.missing.mean())
        if frac > MISSING_DROP_THRESHOLD and col.name != target:
            continue
        kept.append(_impute(col))
    features = [c for c in kept if c.name != target]
    if not features:
        raise CleanError("every feature column has more than 50% missing values")
    return Dataset(tuple(kept), d.n_rows)


# -- feature schema -----------------------------------------------------------

@dataclass(frozen=True)
class Standardize:
    column: str
    mean: float
    std: float

    @property
    def width(self) -> int:
        return 1


@dataclass(frozen=True)
class OneHot:
    column: str
    categories: tuple[str, ...]

    @property
    def width(self) -> int:
        return len(self.categories)


@dataclass(frozen=True)
class Passthrough:
    column: str
    fill: float = 0.0  # substituted for missing cells at apply time

    @property
    def width(self) -> int:
        return 1


Transform = Union[Standardize, OneHot, Passthrough]


@dataclass(frozen=True)
class FeatureSchema:
    input_columns: tuple[str, ...]
    transforms: tuple[Transform, ...]
    target_name: str
    classes: tuple[str, ...] | None  # None for a numeric target

    @property
    def target_kind(self) -> str:
        return "numeric" if self.classes is None else "classes"

    @property
    def n_features(self) -> int:
        return sum(t.width for t in self.transforms)

    @property
    def categorical_columns(self) -> list[str]:
        return [t.column for t in self.transforms if isinstance(t, OneHot)]

    def feature_names(self) -> list[str]:
        names = []
        for t in self.transforms:
            if isinstance(t, OneHot):
                names += [f"{t.column}={c}" for c in t.categories]
            else:
                names.append(t.column)
        return names

    def to_dict(self) -> dict:
        transforms = []
        for t in self.transforms:
            if isinstance(t, Standardize):
                transforms.append({"kind": "standardize", "column": t.column,
                                   "mean": t.mean, "std": t.std})
            elif isinstance(t, OneHot):
                transforms.append({"kind": "one_hot", "column": t.column,
                                   "categories": list(t.categories)})
            else:
                transforms.append({"kind": "passthrough", "column": t.column, "fill": t.fill})
        target = ({"kind": "numeric"} if self.classes is None
                  else {"kind": "classes", "classes": list(self.classes)})
        return {"input_columns": list(self.input_columns), "transforms": transforms,
                "target_name": self.target_name, "target_kind": target}

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureSchema":
        transforms = []
        for t in doc["transforms"]:
            kind = t["kind"]
            if kind == "standardize":
                transforms.append(Standardize(t["column"], float(t["mean"]), float(t["std"])))
            elif kind == "one_hot":
                transforms.append(OneHot(t["column"], tuple(str(c) for c in t["categories"])))
            elif kind == "passthrough":
                transforms.append(Passthrough(t["column"], float(t["fill"])))
            else:
                raise SchemaError(f"unknown transform kind {kind!r}")
        target = doc["target_kind"]
        classes = tuple(str(c) for c in target["classes"]) if target["kind"] == "classes" else None
        return cls(tuple(doc["input_columns"]), tuple(transforms), doc["target_name"], classes)

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


PREPROCESS_MODES = ("standard", "none")


def target_classes(col: Column) -> tuple[str, ...]:
    return tuple(sorted(set(v for v, m in zip(col.text(), col.missing) if not m)))


def fit_schema(d: Dataset, target: str, preprocess: str = "standard",
               classification: bool | None = None,
               classes: Sequence[str] | None = None) -> FeatureSchema:
    """FeatureEngineer: freeze per-column transforms fitted on ``d``.

    ``classification`` defaults to "target is not Numeric". ``classes``
    pins the class list (e.g. the full-data list while fitting on a fold).
    """
    if preprocess not in PREPROCESS_MODES:
        raise SchemaError(f"unsupported preprocess {preprocess!r} (expected one of "
                          f"{', '.join(PREPROCESS_MODES)})")
    if not d.has(target):
        raise SchemaError(f"unknown target column '{target}'")
    tcol = d.column(target)
    if classification is None:
        classification = tcol.ctype is not ColumnType.NUMERIC
    transforms: list[Transform] = []
    inputs = []
    for col in d.columns:
        if col.name == target:
            continue
        inputs.append(col.name)
        keep = ~col.missing
        if col.ctype is ColumnType.CATEGORICAL:
            cats = sorted(set(v for v, m in zip(col.values, col.missing) if not m))
            transforms.append(OneHot(col.name, tuple(cats)))
            continue
        values = col.numeric()[keep]
        mean = float(np.mean(values)) if len(values) else 0.0
        if col.ctype is ColumnType.NUMERIC and preprocess == "standard":
            std = float(np.std(values)) if len(values) else 0.0
            transforms.append(Standardize(col.name, mean, std))
        else:
            transforms.append(Passthrough(col.name, mean))
    if classification:
        cls_list = tuple(classes) if classes is not None else target_classes(tcol)
    else:
        cls_list = None
    return FeatureSchema(tuple(inputs), tuple(transforms), target, cls_list)


def apply_schema(schema: FeatureSchema, d: Dataset) -> tuple[np.ndarray, np.ndarray | None]:
    """Transform ``d`` with frozen statistics; returns (X, y) with y None if the target is absent.

    Nothing is re-estimated here: missing numeric cells take the stored
    mean, unseen or missing categories encode as an all-zero block.
    """
    missing_cols = [c for c in schema.input_columns if not d.has(c)]
    if missing_cols:
        raise SchemaError(f"missing columns: {', '.join(missing_cols)}")
    X = np.zeros((d.n_rows, schema.n_features), dtype=np.float64)
    j = 0
    for t in schema.transforms:
        col = d.column(t.column)
        if isinstance(t, OneHot):
            index = {c: k for k, c in enumerate(t.categories)}
            for i, (value, m) in enumerate(zip(col.text(), col.missing)):
                k = None if m else index.get(value)
                if k is not None:
                    X[i, j + k] = 1.0
        else:
            values = np.where(col.missing, t.fill if isinstance(t, Passthrough) else t.mean,
                              col.numeric())
            if isinstance(t, Standardize):
                values = (values - t.mean) / (t.std if t.std > 0 else 1.0)
            X[:, j] = values
        j += t.width
    y = encode_target(schema, d) if d.has(schema.target_name) else None
    return X, y


def encode_target(schema: FeatureSchema, d: Dataset) -> np.ndarray:
    col = d.column(schema.target_name)
    if col.missing.any():
        raise SchemaError(f"target column '{schema.target_name}' has missing values")
    if schema.classes is None:
        return col.numeric().copy()
    index = {c: k for k, c in enumerate(schema.classes)}
    try:
        return np.array([index[v] for v in col.text()], dtype=np.int64)
    except KeyError as exc:
        raise SchemaError(f"target value {exc.args[0]!r} is not a known class") from None


# -- folds ----------------------------------------------------------------------

def make_rng(seed: int) -> np.random.Generator:
    """The single PRNG used everywhere: numpy's PCG64 seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


def kfold(n: int, k: int, labels: Sequence[int] | None = None, seed: int = 0) -> list[np.ndarray]:
    """Split range(n) into k disjoint, shuffled folds whose sizes differ by at most one.

    With ``labels`` the split is stratified: rows of each class are dealt
    round-robin across folds, continuing where the previous class stopped,
    so per-class counts also differ by at most one between folds. A class
    with fewer than k members triggers a warning (some folds miss it).
    """
    if not 2 <= k <= n:
        raise FoldError(f"need 2 <= folds <= rows, got folds={k}, rows={n}")
    rng = make_rng(seed)
    if labels is None:
        order = rng.permutation(n)
        assignment = np.empty(n, dtype=np.intp)
        assignment[order] = np.arange(n) % k
    else:
        labels = np.asarray(labels)
        if len(labels) != n:
            raise FoldError(f"labels has length {len(labels)}, expected {n}")
        assignment = np.empty(n, dtype=np.intp)
        cursor = 0
        small = []
        for cls in np.unique(labels):
            members = np.flatnonzero(labels == cls)
            if len(members) < k:
                small.append(cls)
            members = members[rng.permutation(len(members))]
            assignment[members] = (cursor + np.arange(len(members))) % k
            cursor += len(members)
        if small:
            warnings.warn(f"classes {small} have fewer members than folds ({k}); "
                          "stratification is partial", stacklevel=2)
    return [np.flatnonzero(assignment == f) for f in range(k)]


class FoldCache:
    """Thread-safe memo of per-fold transformed matrices.

    Values are deterministic functions of the key, so two workers computing
    the same entry concurrently is harmless; the last write wins.
    """

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key, compute: Callable[[], object]):
        with self._lock:
            if key in self._data:
                self.hits += 1
                return self._data[key]
            self.misses += 1
        value = compute()
        with self._lock:
            self._data[key] = value
        return value

    def __len__(self) -> int:
        return len(self._data)
