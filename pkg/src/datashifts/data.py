"""Samples, empirical measures and cost matrices shared by all estimators."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist


class Domain(enum.Enum):
    SOURCE = "source"
    TARGET = "target"


@dataclass(frozen=True)
class Metric:
    """Ground metric on the covariate or label space.

    kind "euclidean" is the plain L2 norm; "minkowski" uses the given order p.
    """

    kind: str = "euclidean"
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("euclidean", "minkowski"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "minkowski" and not self.p >= 1:
            raise ValueError("minkowski order p must be >= 1")

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kind == "euclidean":
            return cdist(a, b, metric="euclidean")
        return cdist(a, b, metric="minkowski", p=self.p)


EUCLIDEAN = Metric("euclidean")


def _as_2d(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got ndim={arr.ndim}")
    return arr


@dataclass(frozen=True)
class LabeledSample:
    """One domain's observations: covariate rows plus optional label rows."""

    covariates: np.ndarray
    labels: np.ndarray | None = None
    domain: Domain = Domain.SOURCE

    def __post_init__(self):
        cov = _as_2d(self.covariates, "covariates")
        if cov.shape[0] < 1:
            raise ValueError("sample must contain at least one row")
        if not np.isfinite(cov).all():
            raise ValueError("covariates contain non-finite entries")
        cov.setflags(write=False)
        object.__setattr__(self, "covariates", cov)
        if self.labels is not None:
            lab = _as_2d(self.labels, "labels")
            if lab.shape[0] != cov.shape[0]:
                raise ValueError(
                    f"label rows ({lab.shape[0]}) != covariate rows ({cov.shape[0]})"
                )
            if not np.isfinite(lab).all():
                raise ValueError("labels contain non-finite entries")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def dim(self) -> int:
        return self.covariates.shape[1]

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("sample carries no labels")
        return self.labels

    def subset(self, idx: np.ndarray) -> "LabeledSample":
        labels = None if self.labels is None else self.labels[idx]
        return LabeledSample(self.covariates[idx], labels, self.domain)


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted point cloud; weights are a probability vector."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _as_2d(self.points, "points")
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.shape[0] != pts.shape[0]:
            raise ValueError("weights must be a vector matching the point count")
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class CostMatrix:
    """Pairwise ground-metric distances between two point clouds."""

    values: np.ndarray
    metric: Metric = field(default=EUCLIDEAN)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("cost matrix must be 2-D")
        if not np.isfinite(vals).all():
            raise ValueError("cost matrix contains non-finite entries")
        if (vals < 0).any():
            raise ValueError("cost matrix contains negative entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def cost_matrix(a, b, metric: Metric = EUCLIDEAN) -> CostMatrix:
    """Pairwise distances between rows of ``a`` and rows of ``b``."""
    a = _as_2d(a, "a")
    b = _as_2d(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"dimension mismatch: a has {a.shape[1]} columns, b has {b.shape[1]}"
        )
    if not np.isfinite(a).all() or not np.isfinite(b).all():
        raise ValueError("point matrices contain non-finite entries")
    vals = metric.pairwise(a, b)
    # cdist can return tiny negatives from cancellation
    return CostMatrix(np.maximum(vals, 0.0), metric)


def empirical_measure(sample: LabeledSample) -> EmpiricalMeasure:
    """Uniform empirical measure on the sample's covariate rows."""
    n = sample.n
    return EmpiricalMeasure(sample.covariates, np.full(n, 1.0 / n))


def load_csv(
    path,
    label_cols: list[str] | None = None,
    domain: Domain = Domain.SOURCE,
) -> LabeledSample:
    """Read a headered CSV into a LabeledSample.

    ``label_cols`` names the label columns; every remaining column is a
    covariate. Missing or non-numeric cells are an error.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    label_cols = label_cols or []
    missing = [c for c in label_cols if c not in header]
    if missing:
        raise ValueError(f"{path}: label columns not found: {missing}")
    label_idx = [header.index(c) for c in label_cols]
    cov_idx = [i for i in range(len(header)) if i not in label_idx]
    data = np.empty((len(rows), len(header)))
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {r + 2} has {len(row)} fields, expected {len(header)}")
        for c, cell in enumerate(row):
            if cell.strip() == "":
                raise ValueError(f"{path}: missing value at row {r + 2}, column {header[c]!r}")
            try:
                data[r, c] = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric value {cell!r} at row {r + 2}, column {header[c]!r}"
                ) from None
    covariates = data[:, cov_idx]
    labels = data[:, label_idx] if label_idx else None
    return LabeledSample(covariates, labels, domain)
