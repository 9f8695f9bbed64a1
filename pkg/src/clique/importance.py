"""Local variable importance: CLIQUE, CLIP, plus global permutation
importance and partial dependence.

CLIQUE replaces feature ``j`` of observation ``i`` by each of ``M``
quantile-grid values, runs the altered row through the CV model that never
saw ``i``, and reports the mean loss increase over the unaltered CV loss.
CLIP does the same with ``M`` random permutations of the column.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cv import CvEnsemble, cv_errors
from .data import RNG_ALGORITHM, Dataset
from .losses import LossSpec, default_loss
from .models import Predictor

METHODS = ("clique", "clip")


class ImportanceError(ValueError):
    pass


def quantile_type7(sorted_values, prob: float) -> float:
    """Type-7 sample quantile of already sorted data.

    ``q(p) = x[lo] + (h - lo) * (x[lo+1] - x[lo])`` with ``h = (n-1) p``
    on zero-based order statistics.
    """
    x = np.asarray(sorted_values, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        raise ImportanceError("quantile of an empty sample")
    if not 0.0 <= prob <= 1.0:
        raise ImportanceError(f"probability {prob} outside [0, 1]")
    h = (n - 1) * prob
    lo = math.floor(h)
    if lo >= n - 1:
        return float(x[n - 1])
    return _interp(x[lo], x[lo + 1], h - lo)


def _interp(a: float, b: float, frac: float) -> float:
    if frac == 0.0:
        return float(a)
    return float(min(a + frac * (b - a), b))


@dataclass(frozen=True, eq=False)
class QuantileGrid:
    feature: int
    values: np.ndarray
    probs: np.ndarray
    categorical: bool = False

    @property
    def M(self) -> int:
        return self.values.shape[0]


def quantile_grid(dataset: Dataset, j: int, M: int = 25) -> QuantileGrid:
    """``M`` replacement values for feature ``j``.

    Numeric: type-7 quantiles at probabilities ``m/(M-1)``, m = 0..M-1, so
    the grid runs from the sample minimum to the maximum (``M = 1`` gives
    the median).  The interpolation index is computed in integer
    arithmetic, which makes ``M = n`` reproduce the sorted column exactly.
    Categorical: every observed level once, ``M`` ignored.
    """
    if not 0 <= j < dataset.p:
        raise ImportanceError(f"feature index {j} out of range for p={dataset.p}")
    if M < 1:
        raise ImportanceError("grid size M must be >= 1")
    col = dataset.X[:, j]
    if dataset.schema[j].is_categorical:
        levels = np.unique(col)
        return QuantileGrid(j, levels, np.full(levels.size, 1.0 / levels.size), True)
    x = np.sort(col)
    n = x.size
    if M == 1:
        return QuantileGrid(j, np.array([quantile_type7(x, 0.5)]), np.array([0.5]))
    values = np.empty(M)
    for m in range(M):
        lo, rem = divmod((n - 1) * m, M - 1)
        values[m] = x[lo] if rem == 0 else _interp(x[lo], x[lo + 1], rem / (M - 1))
    return QuantileGrid(j, values, np.arange(M) / (M - 1))


@dataclass(eq=False)
class ImportanceMatrix:
    """``(n, p)`` local importances with their provenance."""

    V: np.ndarray
    method: str
    M: int
    loss: LossSpec
    seed: int | None
    baseline: np.ndarray
    ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    meta: dict = field(default_factory=dict)
    # (p, M_j, n) altered losses per feature, kept on request
    altered_losses: list | None = None

    @property
    def shape(self):
        return self.V.shape

    def column(self, name_or_index) -> np.ndarray:
        j = name_or_index if isinstance(name_or_index, int) else self.feature_names.index(name_or_index)
        return self.V[:, j]

    def metadata(self) -> dict:
        out = {
            "method": self.method,
            "M": self.M,
            "loss": self.loss.kind,
            "seed": "NA" if self.seed is None else self.seed,
            "n": self.V.shape[0],
            "p": self.V.shape[1],
            "rng": RNG_ALGORITHM,
        }
        out.update(self.meta)
        return out

    def to_csv(self, path) -> Path:
        """Write ``id,<features>`` rows plus a ``<path>.meta`` key=value sidecar."""
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", *self.feature_names])
            for rid, row in zip(self.ids, self.V):
                w.writerow([rid, *(repr(float(v)) for v in row)])
        sidecar = meta_path(path)
        write_keyvalue(self.metadata(), sidecar)
        return sidecar


def meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta")


def write_keyvalue(items: dict, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for key, value in items.items():
            fh.write(f"{key}={value}\n")


def read_keyvalue(path) -> dict:
    out = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line and "=" in line:
                key, value = line.split("=", 1)
                out[key] = value
    return out


def read_importance_csv(path):
    """Return ``(V, ids, feature_names, meta)`` from an exported matrix."""
    path = Path(path)
    if not path.is_file():
        raise ImportanceError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != ["id"]:
        raise ImportanceError(f"{path}: expected a header starting with 'id'")
    names = tuple(rows[0][1:])
    ids, values = [], []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(names) + 1:
            raise ImportanceError(f"{path}: ragged row at line {r}")
        ids.append(row[0])
        values.append([float(v) for v in row[1:]])
    V = np.array(values, dtype=np.float64).reshape(len(ids), len(names))
    sidecar = meta_path(path)
    meta = read_keyvalue(sidecar) if sidecar.is_file() else {}
    return V, tuple(ids), names, meta


def _resolve_loss(dataset: Dataset, loss: LossSpec | None) -> LossSpec:
    loss = loss or default_loss(dataset.task)
    loss.check(dataset.task)
    return loss


def _replaced_losses(ens, dataset, loss, j, columns):
    """Losses with column ``j`` replaced by each row of ``columns`` (shape (R, n))."""
    R, n = columns.shape
    W = np.tile(dataset.X, (R, 1))
    W[:, j] = columns.ravel()
    pred = ens.predict_rows(W, np.tile(np.arange(n), R))
    return loss(pred, np.tile(dataset.y, R)).reshape(R, n)


def _average_increase(losses, baseline):
    # sum of differences, not mean(losses) - baseline: identical losses give exactly 0
    acc = np.zeros_like(baseline)
    for row in losses:
        acc += row - baseline
    return acc / losses.shape[0]


def _run(ens, dataset, loss, columns_for, n_jobs):
    baseline = cv_errors(ens, dataset, loss)

    def one(j):
        losses = _replaced_losses(ens, dataset, loss, j, columns_for(j))
        return _average_increase(losses, baseline), losses

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            results = list(pool.map(one, range(dataset.p)))
    else:
        results = [one(j) for j in range(dataset.p)]
    V = np.column_stack([r[0] for r in results])
    return V, baseline, [r[1] for r in results]


def _meta(ens: CvEnsemble) -> dict:
    meta = {"k": ens.folds.k, "fold_seed": ens.folds.seed}
    meta.update({f"hp.{k}": v for k, v in ens.hp.as_dict().items()})
    return meta


def clique(ens: CvEnsemble, dataset: Dataset, loss: LossSpec | None = None, M: int = 25,
           n_jobs: int = 1, keep_losses: bool = False) -> ImportanceMatrix:
    """CLIQUE importances; no randomness beyond what fitted ``ens``."""
    loss = _resolve_loss(dataset, loss)
    if M < 1:
        raise ImportanceError("grid size M must be >= 1")
    n = dataset.n

    def columns(j):
        grid = quantile_grid(dataset, j, M).values
        return np.repeat(grid[:, None], n, axis=1)

    V, baseline, losses = _run(ens, dataset, loss, columns, n_jobs)
    return ImportanceMatrix(
        V, "clique", M, loss, None, baseline, dataset.ids, tuple(dataset.feature_names),
        _meta(ens), losses if keep_losses else None,
    )


def permutations(n: int, seed: int, j: int, M: int) -> np.ndarray:
    """``(M, n)`` permutations of ``range(n)``; repetition ``m`` of feature
    ``j`` draws from the substream keyed ``(seed, j, m)``."""
    return np.stack([
        np.random.default_rng(np.random.SeedSequence([seed % 2**64, j, m])).permutation(n)
        for m in range(M)
    ])


def clip(ens: CvEnsemble, dataset: Dataset, loss: LossSpec | None = None, M: int = 25,
         seed: int = 0, n_jobs: int = 1, keep_losses: bool = False) -> ImportanceMatrix:
    """CLIP importances: like :func:`clique` but each of the ``M``
    replacement values for row ``i`` is ``X[perm[i], j]`` for a fresh
    uniform permutation ``perm`` of the rows."""
    loss = _resolve_loss(dataset, loss)
    if M < 1:
        raise ImportanceError("number of permutations M must be >= 1")

    def columns(j):
        return dataset.X[:, j][permutations(dataset.n, seed, j, M)]

    V, baseline, losses = _run(ens, dataset, loss, columns, n_jobs)
    return ImportanceMatrix(
        V, "clip", M, loss, seed, baseline, dataset.ids, tuple(dataset.feature_names),
        _meta(ens), losses if keep_losses else None,
    )


def global_permutation_importance(ens: CvEnsemble, dataset: Dataset, loss: LossSpec | None = None,
                                  reps: int = 25, seed: int = 0) -> np.ndarray:
    """Mean increase of the CV error rate when column ``j`` is permuted.

    Uses the same permutation substreams as :func:`clip`, so with
    ``reps == M`` it equals the column means of CLIP's matrix.
    """
    loss = _resolve_loss(dataset, loss)
    if reps < 1:
        raise ImportanceError("reps must be >= 1")
    base = float(np.mean(cv_errors(ens, dataset, loss)))
    out = np.empty(dataset.p)
    for j in range(dataset.p):
        cols = dataset.X[:, j][permutations(dataset.n, seed, j, reps)]
        losses = _replaced_losses(ens, dataset, loss, j, cols)
        out[j] = np.mean([float(np.mean(row)) - base for row in losses])
    return out


def partial_dependence(predictor: Predictor, dataset: Dataset, j: int, M: int = 25,
                       target_class: int | str | None = None) -> list[tuple[float, float]]:
    """Mean prediction over all rows with feature ``j`` set to each grid value.

    Classification averages the vote share of ``target_class`` (the last
    class by default).
    """
    if M < 2:
        raise ImportanceError("partial dependence needs M >= 2")
    grid = quantile_grid(dataset, j, M)
    cls = None
    if predictor.is_classification:
        if target_class is None:
            cls = len(predictor.classes) - 1
        elif isinstance(target_class, str):
            cls = predictor.classes.index(target_class)
        else:
            cls = int(target_class)
    curve = []
    W = np.array(dataset.X)
    for v in grid.values:
        W[:, j] = v
        if cls is None:
            curve.append((float(v), float(np.mean(predictor.predict_batch(W)))))
        else:
            curve.append((float(v), float(np.mean(predictor.predict_batch(W)[1][:, cls]))))
    return curve
