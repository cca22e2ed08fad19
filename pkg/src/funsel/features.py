"""Feature functionals mapping a curve to a scalar, and their evaluation.

The menu is declarative: pointwise evaluation, local averages, occupation
time of a value band, up-crossing counts of a level, and powers of the
path norm or path integral. Each kind has a canonical textual form used in
config files, e.g. ``point@12``, ``avg[1.0,9.0]``, ``occ[-35.0,-30.0)``,
``upx@0.0``, ``pathnorm^2``, ``pathmom^3``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .fdata import FunctionalSample, Grid, as_curve

__all__ = [
    "PointEval",
    "LocalAverage",
    "Occupation",
    "UpCrossings",
    "PathNorm",
    "PathMoment",
    "FeatureSpec",
    "FeatureMatrix",
    "feature_label",
    "parse_feature",
    "validate_feature",
    "evaluate_feature",
    "build_feature_matrix",
    "weight_curve",
    "standardize_columns",
]


@dataclass(frozen=True)
class PointEval:
    """Curve value at one grid index."""

    index: int


@dataclass(frozen=True)
class LocalAverage:
    """Mean curve value over the grid points inside [t_lo, t_hi]."""

    t_lo: float
    t_hi: float


@dataclass(frozen=True)
class Occupation:
    """Time the curve spends with values in the half-open band [y_lo, y_hi).

    Either bound may be infinite, so bands can tile the whole real line.
    """

    y_lo: float
    y_hi: float


@dataclass(frozen=True)
class UpCrossings:
    """Count of transitions from at-or-below a level to strictly above it."""

    level: float


@dataclass(frozen=True)
class PathNorm:
    """L2 norm of the curve raised to an integer power q >= 1."""

    power: int = 1


@dataclass(frozen=True)
class PathMoment:
    """Integral of the q-th power of the curve, q >= 1."""

    power: int = 1


FeatureSpec = Union[
    PointEval, LocalAverage, Occupation, UpCrossings, PathNorm, PathMoment
]


def _fmt(x: float) -> str:
    return repr(float(x))


def feature_label(spec: FeatureSpec) -> str:
    """Canonical textual form of a feature, also used as its label."""
    if isinstance(spec, PointEval):
        return f"point@{spec.index}"
    if isinstance(spec, LocalAverage):
        return f"avg[{_fmt(spec.t_lo)},{_fmt(spec.t_hi)}]"
    if isinstance(spec, Occupation):
        return f"occ[{_fmt(spec.y_lo)},{_fmt(spec.y_hi)})"
    if isinstance(spec, UpCrossings):
        return f"upx@{_fmt(spec.level)}"
    if isinstance(spec, PathNorm):
        return f"pathnorm^{spec.power}"
    if isinstance(spec, PathMoment):
        return f"pathmom^{spec.power}"
    raise TypeError(f"not a feature spec: {spec!r}")


_POINT_RE = re.compile(r"^point@(-?\d+)$")
_AVG_RE = re.compile(r"^avg\[([^,\]]+),([^,\]]+)\]$")
_OCC_RE = re.compile(r"^occ\[([^,\)]+),([^,\)]+)\)$")
_UPX_RE = re.compile(r"^upx@(.+)$")
_PNORM_RE = re.compile(r"^pathnorm\^(\d+)$")
_PMOM_RE = re.compile(r"^pathmom\^(\d+)$")


def parse_feature(text: str) -> FeatureSpec:
    """Parse the canonical textual form back into a feature spec."""
    s = text.strip()
    if m := _POINT_RE.match(s):
        return PointEval(int(m.group(1)))
    if m := _AVG_RE.match(s):
        return LocalAverage(float(m.group(1)), float(m.group(2)))
    if m := _OCC_RE.match(s):
        return Occupation(float(m.group(1)), float(m.group(2)))
    if m := _UPX_RE.match(s):
        return UpCrossings(float(m.group(1)))
    if m := _PNORM_RE.match(s):
        return PathNorm(int(m.group(1)))
    if m := _PMOM_RE.match(s):
        return PathMoment(int(m.group(1)))
    raise ValueError(f"cannot parse feature spec {text!r}")


def _average_window(spec: LocalAverage, grid: Grid) -> tuple[slice, np.ndarray]:
    """Grid slice covered by [t_lo, t_hi] and sub-trapezoid coefficients."""
    lo = int(np.searchsorted(grid.points, spec.t_lo, side="left"))
    hi = int(np.searchsorted(grid.points, spec.t_hi, side="right"))
    if hi - lo < 2:
        raise ValueError(
            f"interval [{spec.t_lo},{spec.t_hi}] covers fewer than two grid points"
        )
    pts = grid.points[lo:hi]
    gaps = np.diff(pts)
    coeff = np.zeros(pts.size)
    coeff[:-1] += gaps / 2.0
    coeff[1:] += gaps / 2.0
    coeff /= pts[-1] - pts[0]
    return slice(lo, hi), coeff


def validate_feature(spec: FeatureSpec, grid: Grid) -> None:
    """Raise ValueError if the feature is not valid on the grid."""
    if isinstance(spec, PointEval):
        if not 0 <= spec.index < grid.n_points:
            raise ValueError(
                f"point index {spec.index} outside grid of {grid.n_points} points"
            )
    elif isinstance(spec, LocalAverage):
        if not (grid.a <= spec.t_lo < spec.t_hi <= grid.b):
            raise ValueError(
                f"average interval [{spec.t_lo},{spec.t_hi}] must sit inside "
                f"[{grid.a},{grid.b}] with t_lo < t_hi"
            )
        _average_window(spec, grid)
    elif isinstance(spec, Occupation):
        if not spec.y_lo < spec.y_hi:
            raise ValueError("occupation band needs y_lo < y_hi")
        if math.isnan(spec.y_lo) or math.isnan(spec.y_hi):
            raise ValueError("occupation bounds cannot be NaN")
    elif isinstance(spec, UpCrossings):
        if not math.isfinite(spec.level):
            raise ValueError("up-crossing level must be finite")
    elif isinstance(spec, (PathNorm, PathMoment)):
        if not (isinstance(spec.power, int) and spec.power >= 1):
            raise ValueError("path power must be an integer >= 1")
    else:
        raise TypeError(f"not a feature spec: {spec!r}")


def _evaluate_matrix(spec: FeatureSpec, curves: np.ndarray, grid: Grid) -> np.ndarray:
    """Feature values for every row of an n-by-N curve matrix."""
    w = grid.weights
    if isinstance(spec, PointEval):
        return curves[:, spec.index].copy()
    if isinstance(spec, LocalAverage):
        sel, coeff = _average_window(spec, grid)
        return curves[:, sel] @ coeff
    if isinstance(spec, Occupation):
        inside = (curves >= spec.y_lo) & (curves < spec.y_hi)
        return inside @ w
    if isinstance(spec, UpCrossings):
        below = curves[:, :-1] <= spec.level
        above = curves[:, 1:] > spec.level
        return (below & above).sum(axis=1).astype(float)
    if isinstance(spec, PathNorm):
        norms = np.sqrt((curves * curves) @ w)
        return norms**spec.power
    if isinstance(spec, PathMoment):
        return (curves**spec.power) @ w
    raise TypeError(f"not a feature spec: {spec!r}")


def evaluate_feature(spec: FeatureSpec, x, grid: Grid) -> float:
    """Evaluate one feature on one curve."""
    validate_feature(spec, grid)
    x = as_curve(x, grid)
    return float(_evaluate_matrix(spec, x[None, :], grid)[0])


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """n-by-p evaluation of p feature specs on n curves."""

    values: np.ndarray
    specs: tuple[FeatureSpec, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.specs):
            raise ValueError("need one matrix column per feature spec")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "specs", tuple(self.specs))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(feature_label(s) for s in self.specs)


def build_feature_matrix(
    sample: FunctionalSample, specs: list[FeatureSpec] | tuple[FeatureSpec, ...]
) -> FeatureMatrix:
    """Evaluate every spec on every curve of the sample."""
    specs = tuple(specs)
    columns = np.empty((sample.n, len(specs)))
    for j, spec in enumerate(specs):
        try:
            validate_feature(spec, sample.grid)
            columns[:, j] = _evaluate_matrix(spec, sample.curves, sample.grid)
        except ValueError as err:
            raise ValueError(
                f"feature column {j} ({feature_label(spec)}): {err}"
            ) from err
    return FeatureMatrix(columns, specs)


def weight_curve(spec: FeatureSpec, grid: Grid) -> np.ndarray:
    """Representer w of a linear feature: f(x) == inner_product(w, x, grid).

    Only pointwise evaluations and local averages are linear in the curve
    values; the other kinds raise.
    """
    validate_feature(spec, grid)
    w = np.zeros(grid.n_points)
    if isinstance(spec, PointEval):
        w[spec.index] = 1.0 / grid.weights[spec.index]
        return w
    if isinstance(spec, LocalAverage):
        sel, coeff = _average_window(spec, grid)
        w[sel] = coeff / grid.weights[sel]
        return w
    raise ValueError(f"{feature_label(spec)} is not a linear feature")


def standardize_columns(fm: FeatureMatrix) -> FeatureMatrix:
    """Z-score each column; constant columns map to all zeros."""
    mu = fm.values.mean(axis=0)
    sd = fm.values.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return FeatureMatrix((fm.values - mu) / sd, fm.specs)
