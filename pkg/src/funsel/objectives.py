"""Distortion objectives: how much a frozen procedure's output changes.

Each objective pushes the original and the blinded curves through the same
fitted model and measures the discrepancy. Values come in a raw form and a
rescaled form h = raw / denominator that is independent of the units of
the data; the classification objective is already unit-free (a matching
error rate), so there raw and rescaled coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blinding import BlindedSample
from .fdata import FunctionalSample
from .statproc import (
    ClassifierModel,
    FpcaModel,
    FunRegModel,
    ScalarRegModel,
    classify_batch,
    fpca_scores_matrix,
    predict_functional,
    predict_scalar,
)

__all__ = [
    "ObjectiveValue",
    "DegenerateObjectiveError",
    "Objective",
    "h_classification",
    "h_pca",
    "h_reg_scalar",
    "h_reg_functional",
    "OBJECTIVE_KINDS",
]

OBJECTIVE_KINDS = ("classify", "pca", "reg-scalar", "reg-fun")


class DegenerateObjectiveError(RuntimeError):
    """The rescaling denominator is zero, so the subset cannot be scored."""


@dataclass(frozen=True)
class ObjectiveValue:
    """Raw and rescaled discrepancy for one candidate subset."""

    raw: float
    rescaled: float
    denominator: float


def _curve_matrix(blinded) -> np.ndarray:
    if isinstance(blinded, BlindedSample):
        return blinded.curves
    if isinstance(blinded, FunctionalSample):
        return blinded.curves
    return np.atleast_2d(np.asarray(blinded, dtype=float))


def _rescaled(raw: float, denominator: float) -> ObjectiveValue:
    if denominator == 0.0:
        raise DegenerateObjectiveError(
            "objective denominator is zero; the procedure output vanishes "
            "on the original sample"
        )
    return ObjectiveValue(raw, raw / denominator, denominator)


def h_classification(
    model: ClassifierModel, sample: FunctionalSample, blinded
) -> ObjectiveValue:
    """Matching error rate: share of curves whose class flips when blinded."""
    blinded = _curve_matrix(blinded)
    original_labels = classify_batch(model, sample.curves)
    blinded_labels = classify_batch(model, blinded)
    raw = float(np.mean(original_labels != blinded_labels))
    return ObjectiveValue(raw, raw, 1.0)


def h_pca(model: FpcaModel, sample: FunctionalSample, blinded) -> ObjectiveValue:
    """Mean squared distance between original and blinded component scores.

    Rescaled by the mean squared original scores, summed over components.
    """
    blinded = _curve_matrix(blinded)
    scores = fpca_scores_matrix(model, sample.curves)
    blinded_scores = fpca_scores_matrix(model, blinded)
    raw = float(((scores - blinded_scores) ** 2).mean(axis=0).sum())
    denominator = float((scores**2).mean(axis=0).sum())
    return _rescaled(raw, denominator)


def h_reg_scalar(
    model: ScalarRegModel, sample: FunctionalSample, blinded
) -> ObjectiveValue:
    """Mean squared gap between predictions from original and blinded curves."""
    blinded = _curve_matrix(blinded)
    pred = predict_scalar(model, sample.curves) - model.intercept
    pred_blinded = predict_scalar(model, blinded) - model.intercept
    raw = float(((pred - pred_blinded) ** 2).mean())
    denominator = float((pred**2).mean())
    return _rescaled(raw, denominator)


def h_reg_functional(
    model: FunRegModel, sample: FunctionalSample, blinded
) -> ObjectiveValue:
    """Mean squared L2 gap between predicted response curves."""
    blinded = _curve_matrix(blinded)
    pred = predict_functional(model, sample.curves) - model.y_mean
    pred_blinded = predict_functional(model, blinded) - model.y_mean
    w = model.y_grid.weights
    raw = float((((pred - pred_blinded) ** 2) @ w).mean())
    denominator = float(((pred**2) @ w).mean())
    return _rescaled(raw, denominator)


@dataclass(frozen=True, eq=False)
class Objective:
    """A frozen procedure bundled with the objective that scores against it."""

    kind: str
    model: ClassifierModel | FpcaModel | ScalarRegModel | FunRegModel

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")

    def evaluate(self, sample: FunctionalSample, blinded) -> ObjectiveValue:
        if self.kind == "classify":
            return h_classification(self.model, sample, blinded)
        if self.kind == "pca":
            return h_pca(self.model, sample, blinded)
        if self.kind == "reg-scalar":
            return h_reg_scalar(self.model, sample, blinded)
        return h_reg_functional(self.model, sample, blinded)
