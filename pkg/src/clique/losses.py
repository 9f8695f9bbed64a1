"""Per-observation loss functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CLASSIFICATION, REGRESSION

LOSS_KINDS = ("squared_error", "zero_one", "brier")
_TASK_OF = {"squared_error": REGRESSION, "zero_one": CLASSIFICATION, "brier": CLASSIFICATION}


class LossError(ValueError):
    pass


@dataclass(frozen=True)
class LossSpec:
    kind: str

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise LossError(f"unknown loss {self.kind!r}; choose from {LOSS_KINDS}")

    def check(self, task: str) -> None:
        if _TASK_OF[self.kind] != task:
            raise LossError(f"loss {self.kind!r} is incompatible with a {task} task")

    def __call__(self, pred, y) -> np.ndarray:
        """Elementwise loss of ``pred`` against ``y``.

        ``pred`` is a float array for regression and a
        ``(class_index, proba)`` pair for classification.
        """
        y = np.asarray(y)
        if self.kind == "squared_error":
            return (np.asarray(pred, dtype=np.float64) - y) ** 2
        labels, proba = pred
        if self.kind == "zero_one":
            return (np.asarray(labels) != y).astype(np.float64)
        onehot = np.zeros_like(proba)
        onehot[np.arange(y.shape[0]), y] = 1.0
        return np.sum((proba - onehot) ** 2, axis=1)


def default_loss(task: str) -> LossSpec:
    return LossSpec("zero_one" if task == CLASSIFICATION else "squared_error")
