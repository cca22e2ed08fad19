"""Walkthrough: which time points drive a curve classifier's decisions.

Two groups of curves differ mainly through the first basis direction. The
matching error rate counts how often the frozen classifier assigns a
blinded curve to a different group than the original curve; the search
looks for a minimal feature subset with a small matching error.
"""

import numpy as np

from funsel import (
    FunctionalSample,
    Grid,
    Objective,
    PointEval,
    SearchConfig,
    classify_batch,
    fit_classifier,
    run_search,
)
from funsel.features import feature_label
from funsel.oracle import fourier_basis

rng = np.random.default_rng(11)
grid = Grid.uniform(0.0, 1.0, 51)
basis = fourier_basis(grid, 2)

n = 120
labels = rng.integers(0, 2, size=n)
shift = np.where(labels[:, None] == 1, 1.2, -1.2) * basis[0]
noise = rng.normal(size=(n, 2)) * np.sqrt([0.6, 0.3])
sample = FunctionalSample(grid, noise @ basis + shift)

classifier = fit_classifier(sample, labels, kind="nearest_centroid")
training_error = np.mean(classify_batch(classifier, sample.curves) != labels)
print(f"nearest-centroid training error: {training_error:.3f}")

specs = [PointEval(i) for i in range(0, 51, 5)]
config = SearchConfig(
    epsilon_tol=0.05,  # tolerate a 5% matching error
    d1=2,              # exhaustive over singletons and pairs
    n_keep=3,
    n_branch=3,
    r=5,
    d_max=5,
    seed=3,
)
result = run_search(sample, specs, Objective("classify", classifier), config)

print("satisfied:", result.satisfied)
print("chosen time points:", [feature_label(specs[i]) for i in result.chosen])
print(f"matching error of the chosen subset: {result.value.rescaled:.3f}")

print("\nmatching error by subset size (best seen):")
for card in (1, 2):
    values = [e.value.rescaled for e in result.trace if len(e.subset) == card]
    if values:
        print(f"  size {card}: {min(values):.3f}")
