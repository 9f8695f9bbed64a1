"""Global views for comparison: permutation importance and partial dependence."""
from clique import Hyperparams, SimSpec, assign_folds, fit_cv, fit_forest, simulate
from clique.importance import global_permutation_importance, partial_dependence


data = simulate(SimSpec("and_gate", n=400, seed=3))
ens = fit_cv(data, Hyperparams(n_trees=300, seed=3), assign_folds(data, k=10, seed=3))

# One number per feature: the average of the CLIP matrix down each column.
for name, value in zip(data.feature_names, global_permutation_importance(ens, data, seed=3)):
    print(f"{name}: {value:.4f}")

# Partial dependence averages over everyone, so it cannot say *where* v1 matters.
full = fit_forest(data, Hyperparams(n_trees=300, seed=3))
for value, p1 in partial_dependence(full, data, 0, M=9):
    print(f"v1={value:+.2f}  P(y=1)={p1:.3f}")
