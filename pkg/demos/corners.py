"""Corners: the same feature is important on one side of the plane only."""
from clique.experiments import run

# run() simulates, fits, scores and summarises in one call.
report = run("corners", n=400, seed=1, n_trees=300)
print(report.to_text())

# The matrices and region masks stay on the report for further digging.
V = report.matrices["clique"].V
mask = report.masks["|v2| > 1/4"]
print("V1 where |v2| < 1/4:", V[~mask, 0].mean())
