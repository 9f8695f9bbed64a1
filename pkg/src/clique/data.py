"""Datasets, CSV ingestion/egress and the seeded simulation generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

REGRESSION = "regression"
CLASSIFICATION = "classification"
TASKS = (REGRESSION, CLASSIFICATION)

SIM_KINDS = ("and_gate", "corners", "reg_interaction", "three_bands")

# Generator behind every seeded draw in the package.
RNG_ALGORITHM = "numpy.random.PCG64(SeedSequence)"

_MISSING_TOKENS = frozenset({"", "na", "nan", "null", "none"})


class DataError(ValueError):
    """Raised for malformed input data (bad CSV, schema violations)."""


@dataclass(frozen=True)
class FeatureSchema:
    name: str
    kind: str = "numeric"
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise DataError(f"unknown feature kind {self.kind!r}")
        if self.kind == "categorical":
            if not self.levels:
                raise DataError(f"categorical feature {self.name!r} has no levels")
            if len(set(self.levels)) != len(self.levels):
                raise DataError(f"categorical feature {self.name!r} has duplicate levels")

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, labels and task description.

    ``X`` is an ``(n, p)`` float array; categorical cells hold the level
    index.  ``y`` holds class indices into ``classes`` for classification
    and floats for regression.
    """

    X: np.ndarray
    y: np.ndarray
    schema: tuple[FeatureSchema, ...]
    task: str
    classes: tuple[str, ...] = ()
    ids: tuple[str, ...] = ()
    label_name: str = "y"

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise DataError("feature matrix must be 2-dimensional")
        n, p = X.shape
        if n < 1 or p < 1:
            raise DataError(f"dataset needs n >= 1 and p >= 1, got n={n}, p={p}")
        schema = tuple(self.schema)
        if len(schema) != p:
            raise DataError(f"schema has {len(schema)} entries for {p} columns")
        names = [s.name for s in schema]
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        if not np.all(np.isfinite(X)):
            raise DataError("feature matrix contains missing or non-finite values")
        for j, s in enumerate(schema):
            if s.is_categorical:
                col = X[:, j]
                if np.any(col != np.floor(col)) or col.min() < 0 or col.max() >= len(s.levels):
                    raise DataError(f"column {s.name!r} holds an invalid level index")
        if self.task not in TASKS:
            raise DataError(f"unknown task {self.task!r}")
        if self.task == CLASSIFICATION:
            if not self.classes:
                raise DataError("classification dataset needs a class list")
            y = np.asarray(self.y, dtype=np.int64)
            if y.min() < 0 or y.max() >= len(self.classes):
                raise DataError("label outside the class list")
        else:
            y = np.asarray(self.y, dtype=np.float64)
            if not np.all(np.isfinite(y)):
                raise DataError("regression labels contain missing or non-finite values")
        if y.shape != (n,):
            raise DataError(f"expected {n} labels, got shape {y.shape}")
        ids = tuple(self.ids) if self.ids else tuple(str(i) for i in range(n))
        if len(ids) != n:
            raise DataError(f"expected {n} row ids, got {len(ids)}")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def feature_names(self) -> list[str]:
        return [s.name for s in self.schema]

    @property
    def is_classification(self) -> bool:
        return self.task == CLASSIFICATION

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def feature_index(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise DataError(f"unknown feature {name!r}") from None

    def label_strings(self) -> list[str]:
        if self.is_classification:
            return [self.classes[k] for k in self.y]
        return [_format_float(v) for v in self.y]

    def column_strings(self, j: int) -> list[str]:
        s = self.schema[j]
        if s.is_categorical:
            return [s.levels[int(v)] for v in self.X[:, j]]
        return [_format_float(v) for v in self.X[:, j]]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.task == other.task
            and self.classes == other.classes
            and self.ids == other.ids
            and self.label_name == other.label_name
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )

    __hash__ = None


@dataclass(frozen=True)
class SimSpec:
    kind: str
    n: int = 400
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SIM_KINDS:
            raise DataError(f"unknown simulation kind {self.kind!r}; choose from {SIM_KINDS}")
        if self.n < 1:
            raise DataError("simulation needs n >= 1")


def _format_float(v: float) -> str:
    # repr round-trips float64 exactly
    return repr(float(v))


def _parse_float(s: str) -> float | None:
    try:
        v = float(s)
    except ValueError:
        return None
    return v


def _is_missing(s: str) -> bool:
    return s.strip().lower() in _MISSING_TOKENS


def _class_order(labels: Sequence[str]) -> tuple[str, ...]:
    seen = list(dict.fromkeys(labels))
    numeric = [_parse_float(s) for s in seen]
    if all(v is not None and math.isfinite(v) for v in numeric):
        return tuple(s for _, s in sorted(zip(numeric, seen), key=lambda t: t[0]))
    return tuple(seen)


def load_csv(path, label_column: str, task: str, id_column: str | None = None) -> Dataset:
    """Read a header-first CSV into a :class:`Dataset`.

    A column is numeric when every cell parses as a float, otherwise it is
    categorical with levels in first-appearance order.  Class labels are
    ordered numerically when they all look like numbers, else by first
    appearance.  Missing cells are rejected.
    """
    if task not in TASKS:
        raise DataError(f"unknown task {task!r}")
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file (no header row)")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if label_column not in header:
        raise DataError(f"{path}: label column not found: {label_column!r}")
    if id_column is not None and id_column not in header:
        raise DataError(f"{path}: id column not found: {id_column!r}")
    if not body:
        raise DataError(f"{path}: no data rows")
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(
                f"{path}: ragged row at line {r}: expected {len(header)} cells, got {len(row)}"
            )
        for c, cell in enumerate(row):
            if _is_missing(cell):
                raise DataError(f"{path}: missing value at line {r}, column {c + 1} ({header[c]!r})")

    label_idx = header.index(label_column)
    id_idx = header.index(id_column) if id_column is not None else None
    feature_cols = [c for c in range(len(header)) if c not in (label_idx, id_idx)]
    if not feature_cols:
        raise DataError(f"{path}: no feature columns")

    n = len(body)
    X = np.empty((n, len(feature_cols)))
    schema = []
    for j, c in enumerate(feature_cols):
        cells = [row[c].strip() for row in body]
        values = [_parse_float(s) for s in cells]
        if all(v is not None for v in values):
            for r, v in enumerate(values):
                if not math.isfinite(v):
                    raise DataError(f"{path}: non-finite value at line {r + 2}, column {c + 1}")
            X[:, j] = values
            schema.append(FeatureSchema(header[c]))
        else:
            levels = tuple(dict.fromkeys(cells))
            lookup = {lv: k for k, lv in enumerate(levels)}
            X[:, j] = [lookup[s] for s in cells]
            schema.append(FeatureSchema(header[c], "categorical", levels))

    raw_labels = [row[label_idx].strip() for row in body]
    if task == CLASSIFICATION:
        classes = _class_order(raw_labels)
        lookup = {c: k for k, c in enumerate(classes)}
        y = np.array([lookup[s] for s in raw_labels], dtype=np.int64)
    else:
        classes = ()
        y = np.empty(n)
        for r, s in enumerate(raw_labels):
            v = _parse_float(s)
            if v is None or not math.isfinite(v):
                raise DataError(f"{path}: non-numeric regression label at line {r + 2}: {s!r}")
            y[r] = v
    ids = tuple(row[id_idx].strip() for row in body) if id_idx is not None else ()
    return Dataset(X, y, tuple(schema), task, classes, ids, label_column)


def write_csv(dataset: Dataset, path, id_column: str | None = None) -> None:
    """Write ``dataset`` so that :func:`load_csv` reads it back unchanged."""
    path = Path(path)
    header = dataset.feature_names + [dataset.label_name]
    columns = [dataset.column_strings(j) for j in range(dataset.p)]
    columns.append(dataset.label_strings())
    if id_column is not None:
        header.insert(0, id_column)
        columns.insert(0, list(dataset.ids))
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(zip(*columns))
    except OSError as exc:
        raise DataError(f"{path}: cannot write: {exc.strerror or exc}") from exc


def and_gate_label(v1, v2):
    return ((np.asarray(v1) > -1 / 3) & (np.asarray(v2) > -1 / 3)).astype(np.int64)


def corners_label(v1, v2):
    return ((np.asarray(v1) > 0) & (np.abs(np.asarray(v2)) > 1 / 4)).astype(np.int64)


def reg_interaction_response(v1, v2, v3):
    # v3 == 0 has probability zero; it falls to the v2 branch
    return np.where(np.asarray(v3) > 0, v1, v2).astype(np.float64)


def three_bands_label(v1):
    v1 = np.asarray(v1)
    return np.where(v1 < -1 / 3, 0, np.where(v1 < 1 / 3, 1, 2)).astype(np.int64)


_SIM_P = {"and_gate": 3, "corners": 3, "reg_interaction": 4, "three_bands": 3}


def simulate(spec: SimSpec) -> Dataset:
    """Draw one of the synthetic datasets.

    Features are iid U(-1, 1), drawn row-major from
    ``default_rng(spec.seed)``.
    """
    p = _SIM_P[spec.kind]
    rng = np.random.default_rng(spec.seed)
    X = rng.uniform(-1.0, 1.0, size=(spec.n, p))
    schema = tuple(FeatureSchema(f"v{j + 1}") for j in range(p))
    if spec.kind == "and_gate":
        return Dataset(X, and_gate_label(X[:, 0], X[:, 1]), schema, CLASSIFICATION, ("0", "1"))
    if spec.kind == "corners":
        return Dataset(X, corners_label(X[:, 0], X[:, 1]), schema, CLASSIFICATION, ("0", "1"))
    if spec.kind == "three_bands":
        return Dataset(X, three_bands_label(X[:, 0]), schema, CLASSIFICATION, ("0", "1", "2"))
    y = reg_interaction_response(X[:, 0], X[:, 1], X[:, 2])
    return Dataset(X, y, schema, REGRESSION)
