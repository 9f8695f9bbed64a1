"""K-fold cross-validation: one model per fold, each blind to its fold."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .losses import LossSpec, default_loss
from .models import Hyperparams, Predictor, fit_forest


class CvError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    k: int
    fold_of: np.ndarray
    seed: int
    stratified: bool = False

    def members(self, f: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == f)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_of, minlength=self.k)

    def to_csv(self, path, ids) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "fold"])
            w.writerows(zip(ids, self.fold_of.tolist()))


def assign_folds(dataset: Dataset, k: int = 10, stratify: bool | None = None, seed: int = 0) -> FoldAssignment:
    """Random balanced partition of the rows into ``k`` folds.

    Rows are shuffled (class by class when stratifying) and dealt to folds
    round-robin, with one cursor running across classes, so fold sizes
    differ by at most one overall and per class.  Fold labels are then
    relabelled by a random permutation.  ``stratify`` defaults to on for
    classification.
    """
    n = dataset.n
    if not 2 <= k <= n:
        raise CvError(f"fold count must satisfy 2 <= k <= n={n}, got {k}")
    if stratify is None:
        stratify = dataset.is_classification
    if stratify and not dataset.is_classification:
        raise CvError("stratification needs a classification dataset")
    rng = np.random.default_rng(np.random.SeedSequence([seed % 2**64, 0xF01D]))
    if stratify:
        order = np.concatenate([
            rng.permutation(np.flatnonzero(dataset.y == c)) for c in range(dataset.n_classes)
        ])
    else:
        order = rng.permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[order] = np.arange(n) % k
    fold_of = rng.permutation(k)[fold_of]
    fold_of.setflags(write=False)
    return FoldAssignment(k, fold_of, seed, bool(stratify))


@dataclass(frozen=True, eq=False)
class CvEnsemble:
    folds: FoldAssignment
    models: tuple[Predictor, ...]
    hp: Hyperparams

    def model_for(self, i: int) -> Predictor:
        return self.models[self.folds.fold_of[i]]

    def predict_rows(self, X, rows=None):
        """Predict ``X[t]`` with the model that excluded row ``rows[t]``.

        ``rows`` defaults to ``arange(len(X))``; classification returns
        ``(class_index, proba)``.
        """
        X = np.asarray(X, dtype=np.float64)
        rows = np.arange(X.shape[0]) if rows is None else np.asarray(rows)
        route = self.folds.fold_of[rows]
        first = self.models[0]
        if first.is_classification:
            labels = np.empty(X.shape[0], dtype=np.int64)
            proba = np.empty((X.shape[0], len(first.classes)))
            for f, model in enumerate(self.models):
                sel = np.flatnonzero(route == f)
                if sel.size:
                    labels[sel], proba[sel] = model.predict_batch(X[sel])
            return labels, proba
        out = np.empty(X.shape[0])
        for f, model in enumerate(self.models):
            sel = np.flatnonzero(route == f)
            if sel.size:
                out[sel] = model.predict_batch(X[sel])
        return out


def fit_cv(dataset: Dataset, hp: Hyperparams, folds: FoldAssignment, n_jobs: int = 1) -> CvEnsemble:
    """Fit one forest per fold on all rows outside that fold.

    A fold's trees draw from substreams keyed by ``hp.seed`` and the
    smallest row index held out of that fold, so renumbering the folds
    leaves every model unchanged.
    """
    if folds.fold_of.shape != (dataset.n,):
        raise CvError("fold assignment does not match the dataset")
    models = []
    for f in range(folds.k):
        held_out = folds.members(f)
        if held_out.size == 0:
            raise CvError(f"fold {f} is empty")
        models.append(fit_forest(dataset, hp, np.flatnonzero(folds.fold_of != f),
                                 key=(int(held_out[0]),), n_jobs=n_jobs))
    models = tuple(models)
    return CvEnsemble(folds, models, models[0].hp)


def cv_errors(ens: CvEnsemble, dataset: Dataset, loss: LossSpec | None = None) -> np.ndarray:
    """Per-row CV loss of each row under the model that excluded it."""
    loss = loss or default_loss(dataset.task)
    loss.check(dataset.task)
    return loss(ens.predict_rows(dataset.X), dataset.y)
