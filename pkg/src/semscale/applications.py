"""Scale-based data tooling: saturation curves, long-tail synthesis,
representative-subset selection, collection stopping, hierarchy matching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    InsufficientSamplesError,
    InvalidHistoryError,
    InvalidInputError,
    InvalidParamsError,
)
from .geometry import LabeledFeatureSet, VolumeParams, feature_volume

__all__ = [
    "CurvePoint",
    "MarginalCurve",
    "StopDecision",
    "ChildMatch",
    "HierarchyMatchResult",
    "long_tail_counts",
    "subsample_balanced",
    "marginal_curve",
    "pizza_select",
    "collection_stop",
    "hierarchy_match",
]

AMBIGUITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CurvePoint:
    """Scale at one sample count (single class, or sum across classes)."""

    sample_count: int
    scale_sum: float


@dataclass(frozen=True)
class MarginalCurve:
    """Per-class scale curves plus their across-class sum."""

    per_class: dict[int, list[CurvePoint]]
    total: list[CurvePoint]


@dataclass(frozen=True)
class StopDecision:
    stopped: bool
    index: int | None  # 1-based position in the history, None when not yet


@dataclass(frozen=True)
class ChildMatch:
    child_id: int
    ratios: dict[int, float]
    assigned_parent: int
    ambiguous: bool


@dataclass(frozen=True)
class HierarchyMatchResult:
    matches: list[ChildMatch]

    def assignments(self) -> dict[int, int]:
        return {m.child_id: m.assigned_parent for m in self.matches}


def long_tail_counts(class_count: int, max_count: int, imbalance_factor: float) -> np.ndarray:
    """Exponentially decaying per-class sample counts.

    n_i = round(N * mu^(i / (1 - M))) for i = 0..M-1, so the first class
    gets N samples and the last N / mu. Rounds half up, floors at 1.
    """
    m = int(class_count)
    n = int(max_count)
    mu = float(imbalance_factor)
    if m < 2:
        raise InvalidParamsError(f"class_count must be >= 2, got {m}")
    if n < 1:
        raise InvalidParamsError(f"max_count must be >= 1, got {n}")
    if not (math.isfinite(mu) and mu >= 1.0):
        raise InvalidParamsError(f"imbalance_factor must be >= 1, got {mu}")
    i = np.arange(m, dtype=np.float64)
    raw = n * mu ** (i / (1.0 - m))
    return np.maximum(np.floor(raw + 0.5).astype(np.int64), 1)


def subsample_balanced(dataset: LabeledFeatureSet, per_class: int, seed: int = 0):
    """Uniform random ``per_class``-subset of every class.

    Returns (subset, column_indices) where the indices refer to columns of
    the input dataset, in class order.
    """
    per_class = int(per_class)
    if per_class < 1:
        raise InvalidParamsError(f"per_class must be >= 1, got {per_class}")
    rng = np.random.default_rng(seed)
    picked = []
    for cid in dataset.classes:
        cols = np.flatnonzero(dataset.labels == cid)
        if cols.size < per_class:
            raise InsufficientSamplesError(
                f"class {cid} has {cols.size} samples, need {per_class}"
            )
        picked.append(np.sort(rng.choice(cols, size=per_class, replace=False)))
    indices = np.concatenate(picked)
    return dataset.subset(indices), indices


def marginal_curve(
    dataset: LabeledFeatureSet,
    sizes,
    nested: bool = True,
    params: VolumeParams | None = None,
    seed: int = 0,
) -> MarginalCurve:
    """Per-class scale as a function of sample count.

    ``sizes`` must be strictly increasing and no larger than the smallest
    class. With ``nested`` each size's subset extends the previous one (a
    single seeded permutation per class); otherwise each size is drawn
    independently.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise InvalidParamsError("sizes must be positive integers")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InvalidParamsError("sizes must be strictly increasing")
    min_class = min(dataset.class_counts().values())
    if sizes[-1] > min_class:
        raise InsufficientSamplesError(
            f"largest size {sizes[-1]} exceeds smallest class ({min_class} samples)"
        )
    rng = np.random.default_rng(seed)
    per_class: dict[int, list[CurvePoint]] = {}
    totals = np.zeros(len(sizes))
    for cid in dataset.classes:
        cols = dataset.class_matrix(cid)
        order = rng.permutation(cols.shape[1])
        points = []
        for k, size in enumerate(sizes):
            if nested:
                chosen = cols[:, order[:size]]
            else:
                chosen = cols[:, rng.permutation(cols.shape[1])[:size]]
            scale = feature_volume(chosen, params)
            points.append(CurvePoint(sample_count=size, scale_sum=scale))
            totals[k] += scale
        per_class[int(cid)] = points
    total = [CurvePoint(sample_count=s, scale_sum=float(t)) for s, t in zip(sizes, totals)]
    return MarginalCurve(per_class=per_class, total=total)


def pizza_select(
    class_samples,
    budget: int,
    trials: int = 20,
    params: VolumeParams | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Pick, among random candidate subsets, the one with the largest scale.

    Draws ``trials`` uniform subsets of size ``budget`` and returns the
    sorted column indices of the subset with the maximal feature volume
    (ties go to the earliest trial).
    """
    z = np.asarray(class_samples, dtype=np.float64)
    if z.ndim != 2:
        raise InvalidInputError(f"class_samples must be a (d, m) matrix, got shape {z.shape}")
    m = z.shape[1]
    budget = int(budget)
    if budget < 1:
        raise InvalidParamsError(f"budget must be >= 1, got {budget}")
    if budget > m:
        raise InsufficientSamplesError(f"budget {budget} exceeds class size {m}")
    if trials < 1:
        raise InvalidParamsError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    best_idx = None
    best_scale = -np.inf
    for _ in range(trials):
        idx = np.sort(rng.choice(m, size=budget, replace=False))
        scale = feature_volume(z[:, idx], params)
        if scale > best_scale:
            best_scale = scale
            best_idx = idx
    return best_idx


def collection_stop(scale_history, threshold_pct: float) -> StopDecision:
    """First point where the relative scale increment falls below the threshold.

    Stops at the first n >= 2 with (S_n - S_{n-1}) / S_n < threshold_pct/100;
    the returned index is that 1-based n.
    """
    s = np.asarray(scale_history, dtype=np.float64)
    if s.ndim != 1 or s.size < 2:
        raise InvalidHistoryError(f"history must hold >= 2 values, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InvalidHistoryError("history contains non-finite values")
    if np.any(s <= 0):
        raise InvalidHistoryError("history values must be positive")
    if not (math.isfinite(threshold_pct) and threshold_pct > 0):
        raise InvalidParamsError(f"threshold_pct must be positive, got {threshold_pct}")
    for n in range(1, s.size):
        if (s[n] - s[n - 1]) / s[n] < threshold_pct / 100.0:
            return StopDecision(stopped=True, index=n + 1)
    return StopDecision(stopped=False, index=None)


def hierarchy_match(children, parents, params: VolumeParams | None = None) -> HierarchyMatchResult:
    """Assign each child set to the parent whose scale moves least when mixed.

    ``children`` and ``parents`` map ids to (d, m) feature matrices. For
    each (child, parent) pair the ratio scale(parent + child) / scale(parent)
    is computed, mixing by plain column concatenation; the child is assigned
    the argmin parent. A ratio tie within 1e-9 flags the child ambiguous.
    """
    if not children or not parents:
        raise InvalidInputError("need at least one child and one parent set")
    parent_mats = {int(pid): np.asarray(m, dtype=np.float64) for pid, m in parents.items()}
    parent_scales = {}
    for pid, mat in parent_mats.items():
        scale = feature_volume(mat, params)
        if scale <= 0:
            raise DegenerateInputError(f"parent {pid} has zero scale (degenerate feature set)")
        parent_scales[pid] = scale
    matches = []
    for cid, child in children.items():
        child = np.asarray(child, dtype=np.float64)
        ratios = {}
        for pid, mat in parent_mats.items():
            if mat.shape[0] != child.shape[0]:
                raise InvalidInputError(
                    f"child {cid} dim {child.shape[0]} != parent {pid} dim {mat.shape[0]}"
                )
            mixed = np.hstack([mat, child])
            ratios[pid] = feature_volume(mixed, params) / parent_scales[pid]
        ordered = sorted(ratios.items(), key=lambda kv: (kv[1], kv[0]))
        best_pid, best_ratio = ordered[0]
        ambiguous = len(ordered) > 1 and ordered[1][1] - best_ratio <= AMBIGUITY_TOLERANCE
        matches.append(ChildMatch(
            child_id=int(cid), ratios=ratios,
            assigned_parent=best_pid, ambiguous=ambiguous,
        ))
    return HierarchyMatchResult(matches=matches)
