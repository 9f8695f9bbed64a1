"""Local variable importance by quantile expectations (CLIQUE) and by
permutations (CLIP), with a built-in random forest and CV harness."""

from .cv import CvEnsemble, FoldAssignment, assign_folds, cv_errors, fit_cv
from .data import Dataset, FeatureSchema, SimSpec, load_csv, simulate, write_csv
from .importance import (
    ImportanceMatrix, QuantileGrid, clip, clique, global_permutation_importance,
    partial_dependence, quantile_grid, quantile_type7,
)
from .losses import LossSpec
from .models import Hyperparams, Predictor, fit_forest, fit_tree, load_predictor, predict

__version__ = "0.1.0"

__all__ = [
    "CvEnsemble", "Dataset", "FeatureSchema", "FoldAssignment", "Hyperparams",
    "ImportanceMatrix", "LossSpec", "Predictor", "QuantileGrid", "SimSpec",
    "assign_folds", "clip", "clique", "cv_errors", "fit_cv", "fit_forest", "fit_tree",
    "global_permutation_importance", "load_csv", "load_predictor", "partial_dependence",
    "predict", "quantile_grid", "quantile_type7", "simulate", "write_csv",
]
