"""Per-class scale imbalance: interference weighting and report assembly.

Raw per-class scales S' (max-normalized feature volumes) are combined with
an inter-class interference weight W derived from class-center distances:

    w_i = 1/(C-1) * sum_j ||o_i - o_j||_2          (mean center distance)
    W_i = log2(alpha + w_i / max_j w_j),  alpha >= 1
    S_i = S'_i * W_i

Classes whose centers crowd the others get a smaller W and therefore a
smaller combined scale. The final loss weights are proportional to 1/S and
normalized to sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    InvalidInputError,
    InvalidParamsError,
    NeedsTwoClassesError,
    ShapeMismatchError,
)
from .geometry import LabeledFeatureSet, VolumeParams, feature_volume

__all__ = [
    "ClassCenters",
    "ClassScale",
    "SemanticScaleReport",
    "class_centers",
    "interference_weights",
    "combined_scale",
    "pearson",
    "imbalance_report",
]

# Floor applied to the smoothed weight W and to degenerate raw scales so the
# inverse loss weight 1/S stays finite (alpha=1 with w_norm=0 gives W=0).
SCALE_FLOOR = 1e-6


@dataclass(frozen=True)
class ClassCenters:
    """Mean feature vector per class, rows aligned with ``class_ids``."""

    centers: np.ndarray  # (C, d)
    class_ids: np.ndarray  # (C,)

    @property
    def class_count(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class ClassScale:
    """One class's row in a SemanticScaleReport."""

    class_id: int
    count: int
    raw_scale: float  # max-normalized S', in (0, 1]
    center: np.ndarray
    interference_weight: float  # mean center distance, unnormalized
    smoothed_weight: float  # W = log2(alpha + w_norm), floored
    combined_scale: float  # S = S' * W
    loss_weight: float  # alpha_i, sums to 1 across classes
    degenerate: bool


@dataclass(frozen=True)
class SemanticScaleReport:
    """Per-class scale/weight summary for a labeled feature set."""

    classes: list[ClassScale]
    alpha: float
    epsilon: float
    dataset_kind: str = "balanced"
    missing_class_ids: tuple[int, ...] = field(default_factory=tuple)

    @property
    def class_ids(self) -> np.ndarray:
        return np.array([c.class_id for c in self.classes], dtype=np.int64)

    @property
    def raw_scales(self) -> np.ndarray:
        return np.array([c.raw_scale for c in self.classes])

    @property
    def combined_scales(self) -> np.ndarray:
        return np.array([c.combined_scale for c in self.classes])

    @property
    def loss_weights(self) -> np.ndarray:
        return np.array([c.loss_weight for c in self.classes])


def class_centers(dataset: LabeledFeatureSet) -> ClassCenters:
    """Arithmetic mean of each class's columns."""
    ids = dataset.classes
    if ids.size < 1:
        raise InvalidInputError("dataset has no classes")
    centers = np.stack([dataset.class_matrix(c).mean(axis=1) for c in ids])
    return ClassCenters(centers=centers, class_ids=ids)


def interference_weights(centers) -> np.ndarray:
    """Mean Euclidean distance from each center to all the others.

    w_i = 1/(C-1) * sum_j ||o_i - o_j||; the i = j term contributes zero.
    """
    if isinstance(centers, ClassCenters):
        o = centers.centers
    else:
        o = np.asarray(centers, dtype=np.float64)
    if o.ndim != 2:
        raise InvalidInputError(f"centers must be a (C, d) matrix, got shape {o.shape}")
    if not np.all(np.isfinite(o)):
        raise InvalidInputError("centers contain non-finite values")
    c = o.shape[0]
    if c < 2:
        raise NeedsTwoClassesError(f"interference weights need >= 2 classes, got {c}")
    diff = o[:, None, :] - o[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    return dist.sum(axis=1) / (c - 1)


def combined_scale(raw_scales, weights, alpha: float) -> np.ndarray:
    """Interference-weighted scale S = S'_norm * log2(alpha + w_norm).

    Both inputs are max-normalized independently before combining. The
    smoothed weight is floored at SCALE_FLOOR so S stays positive whenever
    S' is positive (relevant only for alpha = 1 with some w_norm = 0).
    """
    if not (math.isfinite(alpha) and alpha >= 1.0):
        raise InvalidParamsError(f"alpha must be >= 1, got {alpha}")
    s = np.asarray(raw_scales, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if s.shape != w.shape or s.ndim != 1:
        raise ShapeMismatchError(f"scales {s.shape} and weights {w.shape} must be equal-length 1-D")
    s_max = s.max(initial=0.0)
    w_max = w.max(initial=0.0)
    s_norm = s / s_max if s_max > 0 else np.ones_like(s)
    w_norm = w / w_max if w_max > 0 else np.zeros_like(w)
    smoothed = np.maximum(np.log2(alpha + w_norm), SCALE_FLOOR)
    return s_norm * smoothed


def pearson(x, y) -> float:
    """Pearson product-moment correlation coefficient."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ShapeMismatchError(f"x {xa.shape} and y {ya.shape} must be equal-length 1-D")
    if xa.size < 2:
        raise InvalidInputError("pearson needs at least two points")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise InvalidInputError("inputs contain non-finite values")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("pearson is undefined for zero-variance input")
    r = float(dx @ dy) / (sx * sy)
    return max(-1.0, min(1.0, r))


def imbalance_report(
    dataset: LabeledFeatureSet,
    params: VolumeParams | None = None,
    alpha: float = 1.0,
    dataset_kind: str = "balanced",
) -> SemanticScaleReport:
    """Full per-class pipeline: volumes -> normalization -> interference -> weights.

    Degenerate classes (one sample, or all samples identical) get their raw
    scale clamped to SCALE_FLOOR of the maximum before normalization so the
    inverse weight stays finite.
    """
    if params is None:
        params = VolumeParams()
    if not (math.isfinite(alpha) and alpha >= 1.0):
        raise InvalidParamsError(f"alpha must be >= 1, got {alpha}")
    ids = dataset.classes
    if ids.size < 2:
        raise NeedsTwoClassesError(f"imbalance report needs >= 2 classes, got {ids.size}")

    counts = []
    volumes = []
    for c in ids:
        cols = dataset.class_matrix(c)
        counts.append(cols.shape[1])
        volumes.append(feature_volume(cols, params))
    volumes = np.array(volumes)
    degenerate = volumes <= 0.0

    v_max = volumes.max()
    if v_max > 0.0:
        clamped = np.where(degenerate, SCALE_FLOOR * v_max, volumes)
        raw = clamped / v_max
    else:
        # every class collapsed to a point: no scale information, weigh equally
        raw = np.ones_like(volumes)

    cents = class_centers(dataset)
    w = interference_weights(cents)
    combined = combined_scale(raw, w, alpha)
    inv = 1.0 / combined
    loss_weights = inv / inv.sum()

    w_max = w.max()
    w_norm = w / w_max if w_max > 0 else np.zeros_like(w)
    smoothed = np.maximum(np.log2(alpha + w_norm), SCALE_FLOOR)

    rows = [
        ClassScale(
            class_id=int(ids[i]),
            count=counts[i],
            raw_scale=float(raw[i]),
            center=cents.centers[i],
            interference_weight=float(w[i]),
            smoothed_weight=float(smoothed[i]),
            combined_scale=float(combined[i]),
            loss_weight=float(loss_weights[i]),
            degenerate=bool(degenerate[i]),
        )
        for i in range(ids.size)
    ]
    return SemanticScaleReport(
        classes=rows, alpha=float(alpha), epsilon=params.epsilon, dataset_kind=dataset_kind
    )
