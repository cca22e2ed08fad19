"""Walkthrough: curves, feature functionals, and blinded samples.

Simulates a small Gaussian sample, evaluates a handful of feature
functionals, and shows what r-NN blinding does to the curves as the
feature subset gets more or less informative.
"""

import numpy as np

from funsel import (
    Grid,
    Occupation,
    PathNorm,
    PointEval,
    SubsetIndex,
    UpCrossings,
    blind_sample,
    build_feature_matrix,
    feature_label,
    l2_norm,
)
from funsel.oracle import KlModel, fourier_basis, simulate

grid = Grid.uniform(0.0, 1.0, 101)
basis = fourier_basis(grid, 2)
model = KlModel(grid, np.zeros(101), basis, np.array([4.0, 1.0]))
sample = simulate(model, 60, seed=2024)
print(f"simulated {sample.n} curves on {grid.n_points} grid points")

specs = [
    PointEval(25),
    PointEval(0),
    Occupation(0.0, np.inf),
    UpCrossings(0.0),
    PathNorm(1),
]
fm = build_feature_matrix(sample, specs)
print("\nfeature matrix (first 3 curves):")
print("  columns:", ", ".join(feature_label(s) for s in specs))
for row in fm.values[:3]:
    print("  ", np.round(row, 3))

# Blinding replaces each curve by the average of the r curves closest to
# it in the selected feature coordinates. With r=1 nothing changes.
identity = blind_sample(sample, fm, SubsetIndex.of([0]), r=1)
print("\nr=1 blinding is the identity:",
      bool(np.array_equal(identity.curves, sample.curves)))

# With r=n every curve collapses to the overall mean curve.
collapsed = blind_sample(sample, fm, SubsetIndex.of([0]), r=sample.n)
print("r=n collapses to the mean, spread:",
      round(float(np.ptp(collapsed.curves, axis=0).max()), 12))

# In between, more informative subsets preserve more of each curve.
for subset in [SubsetIndex.of([2]), SubsetIndex.of([0]), SubsetIndex.of([0, 1])]:
    blinded = blind_sample(sample, fm, subset, r=8)
    dist = np.mean(
        [l2_norm(b - x, grid) for b, x in zip(blinded.curves, sample.curves)]
    )
    labels = [feature_label(specs[i]) for i in subset]
    print(f"mean L2 distortion with subset {labels}: {dist:.3f}")
