"""AND gate: a feature can matter for some rows and not at all for others."""
import numpy as np

from clique import Hyperparams, SimSpec, assign_folds, clip, clique, fit_cv, simulate


# --- Simulated data ---
# y = 1 exactly when v1 > -1/3 and v2 > -1/3; v3 is noise.
data = simulate(SimSpec("and_gate", n=400, seed=0))
print(data.X[:5], data.y[:5])


# --- Cross-validated forest ---
hp = Hyperparams(n_trees=500, seed=0)
ens = fit_cv(data, hp, assign_folds(data, k=10, seed=0))


# --- Local importance ---
V = clique(ens, data, M=25).V
P = clip(ens, data, M=25, seed=0).V

# Once v2 is below -1/3 the label is 0 whatever v1 is.
low = data.X[:, 1] < -1 / 3
print("CLIQUE V1, v2 < -1/3 :", V[low, 0].mean())
print("CLIQUE V1, v2 > -1/3 :", V[~low, 0].mean())
print("CLIP   V1, v2 < -1/3 :", P[low, 0].mean())
print("noise feature mean |V3|:", np.abs(V[:, 2]).mean())

# Permutations are random, so CLIP is noisier among the nonzero values.
print("variance, active rows  CLIQUE %.4f  CLIP %.4f" % (V[~low, 0].var(ddof=1), P[~low, 0].var(ddof=1)))
