"""Manifold-volume measures for labeled feature sets.

The semantic scale of a class is the log-scaled volume of the subspace
spanned by its centered feature vectors,

    vol(Z) = 1/2 * log2 det(I_d + d / (m * eps^2) * Zc @ Zc.T),

with Zc the column-centered d x m feature matrix. The log-determinant is
always evaluated through a Cholesky factorization of the shifted Gram
matrix, on the cheaper of the d x d / m x m sides (Sylvester identity),
never through a raw float determinant. ``effective_sample_number`` provides
the count-based prior-art comparator.

All functions here are pure: safe to call concurrently, and bit-stable for
a fixed input. Columns are brought into a canonical order before any
accumulation, so the volume of a feature set depends only on the multiset
of its columns (permutation invariance is exact, not approximate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import centered_logdet_volume
from .errors import InvalidInputError, InvalidParamsError, InvalidShapeError

__all__ = [
    "LabeledFeatureSet",
    "VolumeParams",
    "EffectiveNumberParams",
    "center",
    "feature_volume",
    "sample_volume",
    "gram_parallelotope_volume",
    "effective_sample_number",
]

#: Logarithm base used for every volume quantity in this package.
LOG_BASE = 2


def _as_float_matrix(values, what="input"):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{what} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} contains non-finite values")
    return arr


@dataclass
class LabeledFeatureSet:
    """A d x m matrix of feature columns with one class label per column.

    Attributes:
        values: (d, m) float64 array, one sample per column.
        labels: (m,) int64 array of non-negative class identifiers.
    """

    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.values = _as_float_matrix(self.values, "values")
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise InvalidInputError("labels must be a 1-D sequence")
        if labels.shape[0] != self.values.shape[1]:
            raise InvalidInputError(
                f"labels length {labels.shape[0]} != sample count {self.values.shape[1]}"
            )
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            as_int = labels.astype(np.int64)
            if not np.array_equal(as_int, labels):
                raise InvalidInputError("labels must be integers")
            labels = as_int
        self.labels = labels.astype(np.int64)
        if np.any(self.labels < 0):
            raise InvalidInputError("labels must be non-negative")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def count(self) -> int:
        return self.values.shape[1]

    @property
    def classes(self) -> np.ndarray:
        """Sorted unique class ids."""
        return np.unique(self.labels)

    def class_matrix(self, class_id) -> np.ndarray:
        """Columns belonging to one class, in dataset order."""
        return self.values[:, self.labels == class_id]

    def class_counts(self) -> dict[int, int]:
        ids, counts = np.unique(self.labels, return_counts=True)
        return {int(c): int(n) for c, n in zip(ids, counts)}

    def subset(self, column_indices) -> "LabeledFeatureSet":
        idx = np.asarray(column_indices, dtype=np.int64)
        return LabeledFeatureSet(self.values[:, idx], self.labels[idx])


@dataclass(frozen=True)
class VolumeParams:
    """Sphere-packing radius for the volume measure (log base fixed at 2)."""

    epsilon: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidParamsError(f"epsilon must be a positive real, got {self.epsilon}")


@dataclass(frozen=True)
class EffectiveNumberParams:
    """Overlap rate beta in [0, 1) for the effective-number comparator."""

    beta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.beta) and 0.0 <= self.beta < 1.0):
            raise InvalidParamsError(f"beta must lie in [0, 1), got {self.beta}")

    @classmethod
    def from_prototype_volume(cls, volume: float) -> "EffectiveNumberParams":
        """Build from a prototype volume N >= 1 via beta = (N - 1) / N."""
        if not (math.isfinite(volume) and volume >= 1.0):
            raise InvalidParamsError(f"prototype volume must be >= 1, got {volume}")
        return cls(beta=(volume - 1.0) / volume)


def center(features) -> np.ndarray:
    """Subtract the per-dimension mean from every column.

    Accepts a LabeledFeatureSet or a raw (d, m) matrix; returns a matrix
    whose row means are zero.
    """
    if isinstance(features, LabeledFeatureSet):
        z = features.values
    else:
        z = _as_float_matrix(features)
    return z - z.mean(axis=1, keepdims=True)


def _canonical_columns(z: np.ndarray) -> np.ndarray:
    # Sort columns into a canonical order so the result depends only on the
    # multiset of samples; makes permutation invariance exact. The first row
    # alone is a total order unless it has ties; only then pay for the full
    # lexicographic sort (columns that tie on every row are identical, so
    # their relative order cannot matter).
    order = np.argsort(z[0], kind="stable")
    first = z[0, order]
    if first.size > 1 and np.any(first[1:] == first[:-1]):
        order = np.lexsort(z[::-1])
    return np.ascontiguousarray(z[:, order])


def feature_volume(features, params: VolumeParams | None = None, side: str = "auto") -> float:
    """Log2-volume of the subspace spanned by the centered feature columns.

    Args:
        features: LabeledFeatureSet or (d, m) matrix, one sample per column.
        params: volume parameters; defaults to epsilon = 1.
        side: 'auto' picks the cheaper Gram form, 'feature' forces the
            d x d form, 'sample' forces the m x m dual form. Both forms
            agree by the Sylvester determinant identity.

    Returns:
        1/2 * log2 det(I + d/(m*eps^2) * Zc Zc^T), a non-negative float.
        Zero iff all columns are identical.
    """
    if params is None:
        params = VolumeParams()
    elif not isinstance(params, VolumeParams):
        params = VolumeParams(epsilon=float(params))
    if isinstance(features, LabeledFeatureSet):
        z = features.values
    else:
        z = _as_float_matrix(features)
    d, m = z.shape
    if side == "auto":
        use_dual = m < d
    elif side == "feature":
        use_dual = False
    elif side == "sample":
        use_dual = True
    else:
        raise InvalidParamsError(f"side must be 'auto', 'feature' or 'sample', got {side!r}")
    scale = d / (m * params.epsilon**2)
    return centered_logdet_volume(_canonical_columns(z), scale, use_dual)


def sample_volume(flattened_samples) -> float:
    """Volume of pre-flattened raw samples: feature_volume with epsilon = 1."""
    return feature_volume(flattened_samples, VolumeParams(epsilon=1.0))


def gram_parallelotope_volume(vectors) -> float:
    """k-dimensional volume of the parallelotope spanned by k column vectors.

    Equals sqrt(det(Z^T Z)), computed as the product of singular values of
    Z (n x k). For k = 1 this is the vector length; for k = n it equals
    |det(Z)|.
    """
    z = np.asarray(vectors, dtype=np.float64)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    if z.ndim != 2:
        raise InvalidShapeError(f"expected a matrix of column vectors, got ndim={z.ndim}")
    n, k = z.shape
    if k < 1 or n < 1:
        raise InvalidShapeError(f"need at least one vector in at least 1-D, got shape {z.shape}")
    if k > n:
        raise InvalidShapeError(f"cannot span a {k}-volume with vectors in R^{n}")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("vectors contain non-finite values")
    return float(np.prod(np.linalg.svd(z, compute_uv=False)))


def effective_sample_number(n: int, params) -> float:
    """Effective number of samples (1 - beta^n) / (1 - beta).

    Stable as beta -> 1 (log1p/expm1 evaluation); clamped to the exact
    mathematical bounds 1 <= E_n <= n.

    ``params`` may be an EffectiveNumberParams or a plain beta float.
    """
    if isinstance(params, EffectiveNumberParams):
        beta = params.beta
    else:
        beta = float(params)
        if not (math.isfinite(beta) and 0.0 <= beta < 1.0):
            raise InvalidParamsError(f"beta must lie in [0, 1), got {beta}")
    n = int(n)
    if n < 1:
        raise InvalidParamsError(f"n must be a positive integer, got {n}")
    if beta == 0.0:
        return 1.0
    # 1 - beta^n = -expm1(n * log1p(beta - 1)) keeps full precision near beta=1
    numerator = -math.expm1(n * math.log1p(beta - 1.0))
    value = numerator / (1.0 - beta)
    return max(1.0, min(value, float(n)))
