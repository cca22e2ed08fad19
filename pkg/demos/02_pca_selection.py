"""Walkthrough: selecting features that preserve principal-component scores.

Fits functional PCA on a synthetic sample, then searches for the smallest
feature subset whose blinded curves keep the component scores nearly
unchanged (rescaled objective below a tolerance).
"""

import math

import numpy as np

from funsel import (
    Grid,
    Objective,
    PointEval,
    SearchConfig,
    fit_fpca,
    run_search,
)
from funsel.features import feature_label
from funsel.oracle import KlModel, fourier_basis, simulate

grid = Grid.uniform(0.0, 1.0, 65)
basis = fourier_basis(grid, 3)
model = KlModel(grid, np.zeros(65), basis, np.array([16.0, 8.0, 4.0]))
sample = simulate(model, 200, seed=7)

fpca = fit_fpca(sample, 3)
print("fitted FPCA eigenvalues:", np.round(fpca.eigenvalues, 2))

# Candidate features: pointwise evaluations across the domain.
specs = [PointEval(i) for i in range(2, 63, 5)]
print(f"candidate pool: {len(specs)} pointwise evaluations")

config = SearchConfig(
    epsilon_tol=0.05,   # keep at most 5% relative score distortion
    d1=1,               # exhaustive over singletons
    n_keep=3,           # subsets retained between rounds
    n_branch=4,         # random expansions per retained subset
    r=8,                # neighbors used for blinding
    d_max=6,
    seed=42,
)
result = run_search(sample, specs, Objective("pca", fpca), config)

print("\nsatisfied:", result.satisfied)
print("chosen subset:", [feature_label(specs[i]) for i in result.chosen])
print("rescaled objective:", round(result.value.rescaled, 5))
print("rounds used:", result.rounds_used, "| evaluations:", len(result.trace))

best = math.inf
print("\nbest rescaled value seen per round:")
for rnd in range(max(e.round for e in result.trace) + 1):
    round_values = [e.value.rescaled for e in result.trace if e.round == rnd]
    if round_values:
        best = min(best, min(round_values))
    print(f"  round {rnd}: {best:.5f}")
