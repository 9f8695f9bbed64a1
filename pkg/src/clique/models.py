"""CART trees and random forests behind a uniform fit/predict surface."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .data import CLASSIFICATION, Dataset, FeatureSchema

FORMAT_VERSION = 1


class ModelError(ValueError):
    """Invalid hyperparameters, inputs that do not match a model's schema."""


@dataclass(frozen=True)
class Hyperparams:
    """Random forest settings.

    ``mtry`` and ``min_node_size`` default per task: ``floor(sqrt(p))`` and
    1 for classification, ``floor(p/3)`` and 5 for regression (mtry at
    least 1).  A node is split only while it holds more than
    ``min_node_size`` rows.
    """

    n_trees: int = 500
    mtry: int | None = None
    min_node_size: int | None = None
    max_depth: int | None = None
    bootstrap: bool = True
    seed: int = 0

    def resolve(self, p: int, task: str) -> "Hyperparams":
        classification = task == CLASSIFICATION
        mtry = self.mtry
        if mtry is None:
            mtry = max(1, math.isqrt(p) if classification else p // 3)
        node = self.min_node_size
        if node is None:
            node = 1 if classification else 5
        hp = replace(self, mtry=mtry, min_node_size=node)
        if hp.n_trees < 1:
            raise ModelError("n_trees must be >= 1")
        if not 1 <= hp.mtry <= p:
            raise ModelError(f"mtry must lie in [1, {p}], got {hp.mtry}")
        if hp.min_node_size < 1:
            raise ModelError("min_node_size must be >= 1")
        if hp.max_depth is not None and hp.max_depth < 0:
            raise ModelError("max_depth must be >= 0")
        return hp

    def as_dict(self) -> dict:
        return asdict(self)


class ClassPrediction(NamedTuple):
    label: str
    proba: np.ndarray


def stream_seed(*key: int) -> int:
    """64-bit seed for the substream identified by ``key``."""
    entropy = [int(k) % 2**64 for k in key]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def _schema_fingerprint(schema: Sequence[FeatureSchema]) -> tuple:
    return tuple((s.name, s.kind, tuple(s.levels)) for s in schema)


class Predictor:
    """A fitted tree ensemble (a single tree is an ensemble of one).

    Classification predicts the majority vote over trees, ties going to the
    class listed first; ``proba`` holds the vote shares.  Regression
    predicts the mean of the tree outputs.
    """

    def __init__(self, trees, schema, task, classes, train_rows, hp):
        self.schema = tuple(schema)
        self.fingerprint = _schema_fingerprint(self.schema)
        self.task = task
        self.classes = tuple(classes)
        self.train_rows = np.asarray(train_rows, dtype=np.int64)
        self.hp = hp
        self.trees = list(trees)
        sizes = [len(t[0]) for t in self.trees]
        self._roots = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        offset = np.repeat(self._roots, sizes)
        self._feature = np.concatenate([t[0] for t in self.trees])
        self._threshold = np.concatenate([t[1] for t in self.trees])
        left = np.concatenate([t[2] for t in self.trees])
        right = np.concatenate([t[3] for t in self.trees])
        self._left = np.where(left >= 0, left + offset, -1)
        self._right = np.where(right >= 0, right + offset, -1)
        value = np.concatenate([t[4] for t in self.trees])
        if self.is_classification:
            self._leaf_class = np.argmax(value, axis=1).astype(np.int64)
        else:
            self._leaf_value = value[:, 0].copy()
        self._is_cat = np.array([s.is_categorical for s in self.schema], dtype=np.bool_)

    @property
    def is_classification(self) -> bool:
        return self.task == CLASSIFICATION

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def p(self) -> int:
        return len(self.schema)

    def used_features(self) -> set[int]:
        return set(int(f) for f in np.unique(self._feature) if f >= 0)

    def _check(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.p:
            raise ModelError(f"schema mismatch: expected rows with {self.p} cells, got shape {X.shape}")
        return X

    def votes(self, X) -> np.ndarray:
        return _kernels.forest_votes(
            self._check(X), self._roots, self._feature, self._threshold,
            self._left, self._right, self._leaf_class, self._is_cat, len(self.classes),
        )

    def predict_batch(self, X):
        """Predict every row of ``X``.

        Returns ``(class_index, proba)`` arrays for classification and a
        float array for regression.
        """
        if self.is_classification:
            votes = self.votes(X)
            return np.argmax(votes, axis=1), votes / self.n_trees
        return _kernels.forest_mean(
            self._check(X), self._roots, self._feature, self._threshold,
            self._left, self._right, self._leaf_value, self._is_cat,
        )

    def predict(self, row):
        X = self._check(np.atleast_2d(np.asarray(row, dtype=np.float64)))
        if X.shape[0] != 1:
            raise ModelError("predict takes a single row; use predict_batch")
        if self.is_classification:
            label, proba = self.predict_batch(X)
            return ClassPrediction(self.classes[label[0]], proba[0])
        return float(self.predict_batch(X)[0])

    def save(self, path) -> None:
        """Write a versioned ``.npz`` archive; see :func:`load_predictor`."""
        header = {
            "format": "clique-forest",
            "version": FORMAT_VERSION,
            "task": self.task,
            "classes": list(self.classes),
            "schema": [list(f) for f in self.fingerprint],
            "hp": self.hp.as_dict() if self.hp is not None else None,
            "n_trees": self.n_trees,
        }
        arrays = {"header": np.array(json.dumps(header)), "train_rows": self.train_rows}
        for t, tree in enumerate(self.trees):
            for name, arr in zip(("feature", "threshold", "left", "right", "value"), tree):
                arrays[f"t{t}_{name}"] = arr
        with Path(path).open("wb") as fh:
            np.savez(fh, **arrays)


def load_predictor(path) -> Predictor:
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("format") != "clique-forest" or header.get("version") != FORMAT_VERSION:
            raise ModelError(f"{path}: unsupported model file")
        trees = [
            tuple(z[f"t{t}_{name}"] for name in ("feature", "threshold", "left", "right", "value"))
            for t in range(header["n_trees"])
        ]
        train_rows = z["train_rows"]
    schema = [FeatureSchema(name, kind, tuple(levels)) for name, kind, levels in header["schema"]]
    hp = Hyperparams(**header["hp"]) if header["hp"] is not None else None
    return Predictor(trees, schema, header["task"], header["classes"], train_rows, hp)


def predict(predictor: Predictor, row):
    """Point prediction for one row: ``ClassPrediction`` or a float."""
    return predictor.predict(row)


def _grow(dataset: Dataset, hp: Hyperparams, rows: np.ndarray, seed: int):
    is_cat = np.array([s.is_categorical for s in dataset.schema], dtype=np.bool_)
    n_levels = np.array([len(s.levels) for s in dataset.schema], dtype=np.int64)
    if dataset.is_classification:
        yc, yr, k = dataset.y, np.zeros(1), dataset.n_classes
    else:
        yc, yr, k = np.zeros(1, dtype=np.int64), dataset.y, 0
    return _kernels.grow_tree(
        dataset.X, yc, yr, np.asarray(rows, dtype=np.int64), is_cat, n_levels, k,
        hp.mtry, hp.min_node_size, -1 if hp.max_depth is None else hp.max_depth,
        np.uint64(seed),
    )


def _validate_rows(dataset: Dataset, rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64).ravel()
    if rows.size == 0:
        raise ModelError("cannot fit on an empty row subset")
    if rows.min() < 0 or rows.max() >= dataset.n:
        raise ModelError("row subset holds out-of-range indices")
    return rows


def _fit_one(dataset, hp, rows, key, t):
    # bootstrap draws and node feature sampling come from separate substreams
    if hp.bootstrap:
        rng = np.random.default_rng(np.random.SeedSequence([k % 2**64 for k in (hp.seed, *key, t, 0)]))
        sample = rows[rng.integers(0, rows.size, rows.size)]
    else:
        sample = rows
    return _grow(dataset, hp, sample, stream_seed(hp.seed, *key, t, 1))


def fit_tree(dataset: Dataset, hp: Hyperparams, row_subset=None, key: tuple = (), tree_index: int = 0) -> Predictor:
    """Fit a single CART tree on ``row_subset`` (all rows by default).

    ``bootstrap`` is ignored here.  ``key`` and ``tree_index`` select the
    feature-sampling substream, matching tree ``tree_index`` of
    :func:`fit_forest` with the same ``key``.
    """
    hp = hp.resolve(dataset.p, dataset.task)
    rows = _validate_rows(dataset, np.arange(dataset.n) if row_subset is None else row_subset)
    tree = _fit_one(dataset, replace(hp, bootstrap=False), rows, key, tree_index)
    return Predictor([tree], dataset.schema, dataset.task, dataset.classes, np.unique(rows), hp)


def fit_forest(dataset: Dataset, hp: Hyperparams, row_subset=None, key: tuple = (), n_jobs: int = 1) -> Predictor:
    """Fit ``hp.n_trees`` CART trees, each on its own bootstrap resample.

    Tree ``t`` draws from substreams keyed by ``(hp.seed, *key, t)``, so the
    result does not depend on ``n_jobs``.
    """
    hp = hp.resolve(dataset.p, dataset.task)
    rows = _validate_rows(dataset, np.arange(dataset.n) if row_subset is None else row_subset)
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            trees = list(pool.map(lambda t: _fit_one(dataset, hp, rows, key, t), range(hp.n_trees)))
    else:
        trees = [_fit_one(dataset, hp, rows, key, t) for t in range(hp.n_trees)]
    return Predictor(trees, dataset.schema, dataset.task, dataset.classes, np.unique(rows), hp)
