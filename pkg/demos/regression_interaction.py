"""Regression: importance of v1 grows like v1 squared, but only when v3 > 0."""
import numpy as np

from clique import Hyperparams, SimSpec, assign_folds, clique, fit_cv, simulate
from clique.losses import LossSpec


data = simulate(SimSpec("reg_interaction", n=400, seed=2))
ens = fit_cv(data, Hyperparams(n_trees=300, seed=2), assign_folds(data, k=10, seed=2))
V = clique(ens, data, LossSpec("squared_error"), M=25).V


# --- Where v3 switches v1 on ---
on = data.X[:, 2] > 0
print("mean V1, v3 > 0:", V[on, 0].mean())
print("mean V1, v3 < 0:", V[~on, 0].mean())

# Squared-error loss makes the increase quadratic in the distance moved.
r = np.corrcoef(V[on, 0], data.X[on, 0] ** 2)[0, 1]
print("corr(V1, v1^2) on active rows: %.3f" % r)
