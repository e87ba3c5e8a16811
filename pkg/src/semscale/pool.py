"""FIFO storage pool of reduced historical features.

The pool holds one (64-dim feature, label) row per training sample. During
training the loop removes the oldest mini-batch and pushes the current one
every iteration, so from the end of epoch 1 onward the pool always holds
exactly one feature per sample. Scales are then computed over the pool
contents, exploiting the slow drift of features across nearby iterations.

Implemented as a ring buffer; batch boundaries are remembered so the
trainer can always remove exactly the oldest stored batch even when the
final batch of an epoch is ragged.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityExceededError,
    InvalidInputError,
    MissingClassError,
    PoolUnderflowError,
    ShapeMismatchError,
)
from .geometry import LabeledFeatureSet, VolumeParams
from .imbalance import SemanticScaleReport, imbalance_report

__all__ = [
    "REDUCED_DIM",
    "StoragePool",
    "StageSchedule",
    "reduce_features",
    "pool_scales",
]

REDUCED_DIM = 64


@dataclass(frozen=True)
class StageSchedule:
    """Three-stage boundaries: fill (epoch 1), refresh (2..n), re-weight (>n)."""

    warm_epochs: int = 5

    def __post_init__(self):
        if self.warm_epochs < 1:
            raise InvalidInputError(f"warm_epochs must be >= 1, got {self.warm_epochs}")

    def stage(self, epoch: int) -> int:
        if epoch < 1:
            raise InvalidInputError(f"epoch must be >= 1, got {epoch}")
        if epoch == 1:
            return 1
        return 2 if epoch <= self.warm_epochs else 3


def reduce_features(batch, target_dim: int = REDUCED_DIM, pad: bool = False) -> np.ndarray:
    """Non-overlapping window averaging along the feature axis.

    ``batch`` is (d, b) with one sample per column. The window is
    d / target_dim; d == target_dim is the identity. When d is not a
    multiple of target_dim, ``pad=True`` right-pads with zeros to the next
    multiple first; otherwise the call fails.
    """
    z = np.asarray(batch, dtype=np.float64)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    if z.ndim != 2:
        raise InvalidInputError(f"batch must be a (d, b) matrix, got shape {z.shape}")
    d, b = z.shape
    if target_dim < 1:
        raise InvalidInputError(f"target_dim must be >= 1, got {target_dim}")
    if d == target_dim:
        return z.copy()
    if d % target_dim != 0:
        if not pad:
            raise ShapeMismatchError(
                f"feature dim {d} is not a multiple of {target_dim}; pass pad=True to zero-pad"
            )
        padded = target_dim * -(-d // target_dim)
        z = np.vstack([z, np.zeros((padded - d, b))])
        d = padded
    window = d // target_dim
    return z.reshape(target_dim, window, b).mean(axis=1)


class StoragePool:
    """Fixed-capacity FIFO of (feature, label) rows, batch boundaries kept."""

    def __init__(self, capacity: int, dim: int = REDUCED_DIM):
        if capacity < 1:
            raise InvalidInputError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self.dim = int(dim)
        self._features = np.empty((self.capacity, self.dim))
        self._labels = np.empty(self.capacity, dtype=np.int64)
        self._head = 0  # index of the oldest row
        self._size = 0
        self._batch_sizes: deque[int] = deque()
        self.push_count = 0

    def __len__(self) -> int:
        return self._size

    @property
    def oldest_batch_size(self) -> int:
        """Size of the oldest stored batch (0 when empty)."""
        return self._batch_sizes[0] if self._batch_sizes else 0

    def push_batch(self, features, labels) -> "StoragePool":
        """Append one mini-batch of (dim, b) features and b labels."""
        f = np.asarray(features, dtype=np.float64)
        if f.ndim == 1:
            f = f.reshape(-1, 1)
        y = np.asarray(labels, dtype=np.int64).ravel()
        if f.shape[0] != self.dim:
            raise ShapeMismatchError(f"expected {self.dim}-dim features, got {f.shape[0]}")
        b = f.shape[1]
        if b == 0:
            raise InvalidInputError("batch must be non-empty")
        if y.shape[0] != b:
            raise ShapeMismatchError(f"{b} feature columns but {y.shape[0]} labels")
        if self._size + b > self.capacity:
            raise CapacityExceededError(
                f"push of {b} rows would exceed capacity {self.capacity} "
                f"(size {self._size}); pop the oldest batch first"
            )
        idx = (self._head + self._size + np.arange(b)) % self.capacity
        self._features[idx] = f.T
        self._labels[idx] = y
        self._size += b
        self._batch_sizes.append(b)
        self.push_count += 1
        return self

    def pop_oldest(self, count: int) -> "StoragePool":
        """Remove the first ``count`` rows in insertion order."""
        count = int(count)
        if count < 1:
            raise InvalidInputError(f"pop count must be >= 1, got {count}")
        if count > self._size:
            raise PoolUnderflowError(f"cannot pop {count} rows from a pool of {self._size}")
        self._head = (self._head + count) % self.capacity
        self._size -= count
        remaining = count
        while remaining > 0:
            front = self._batch_sizes[0]
            if front <= remaining:
                self._batch_sizes.popleft()
                remaining -= front
            else:
                self._batch_sizes[0] = front - remaining
                remaining = 0
        return self

    def snapshot(self) -> tuple[np.ndarray, np.ndarray]:
        """Copy of (features (dim, size), labels (size,)) in insertion order."""
        idx = (self._head + np.arange(self._size)) % self.capacity
        return self._features[idx].T.copy(), self._labels[idx].copy()

    def to_labeled_feature_set(self) -> LabeledFeatureSet:
        if self._size == 0:
            raise InvalidInputError("pool is empty")
        features, labels = self.snapshot()
        return LabeledFeatureSet(features, labels)


def pool_scales(
    pool: StoragePool,
    alpha: float = 1.0,
    params: VolumeParams | None = None,
    expected_classes=None,
    dataset_kind: str = "balanced",
    strict: bool = True,
) -> SemanticScaleReport:
    """Per-class scale report over the current pool contents.

    When ``expected_classes`` is given and some class has no rows, the call
    raises MissingClassError if strict, otherwise the report covers the
    present classes and records the absentees in ``missing_class_ids`` (the
    caller is expected to treat those classes as having the clamped minimum
    scale, i.e. a neutral weight).
    """
    dataset = pool.to_labeled_feature_set()
    missing: tuple[int, ...] = ()
    if expected_classes is not None:
        expected = {int(c) for c in np.asarray(expected_classes).ravel()}
        present = {int(c) for c in dataset.classes}
        absent = sorted(expected - present)
        if absent:
            if strict:
                raise MissingClassError(f"classes absent from pool: {absent}")
            missing = tuple(absent)
    report = imbalance_report(dataset, params=params, alpha=alpha, dataset_kind=dataset_kind)
    if missing:
        report = SemanticScaleReport(
            classes=report.classes,
            alpha=report.alpha,
            epsilon=report.epsilon,
            dataset_kind=report.dataset_kind,
            missing_class_ids=missing,
        )
    return report
