"""Scale-balanced loss weights and the weighted loss family.

Weights are inversely proportional to the per-class combined scale and
normalized to sum to one. Every loss here takes a per-class multiplier
w_y for the true class; the trainer passes mean-1 rescaled multipliers
(C * alpha_y) so the expected loss magnitude matches unweighted training.

Losses use the natural log; volumes elsewhere use log2. The two never mix
in one formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVectorError,
    InvalidInputError,
    InvalidLabelError,
    InvalidParamsError,
    InvalidProbabilityError,
    InvalidScaleError,
)

__all__ = [
    "DsbWeights",
    "LossParams",
    "dsb_weights",
    "dsb_ce",
    "dsb_focal",
    "dsb_nsm",
    "dsb_soft_triple",
]


@dataclass(frozen=True)
class DsbWeights:
    """Normalized inverse-scale weights: alpha_i = (1/S_i) / sum_j (1/S_j)."""

    per_class: np.ndarray
    source_scales: np.ndarray

    @property
    def class_count(self) -> int:
        return self.per_class.shape[0]

    def multipliers(self) -> np.ndarray:
        """Mean-1 rescaling C * alpha used as the actual loss multipliers."""
        return self.per_class * self.class_count


@dataclass(frozen=True)
class LossParams:
    """Hyperparameters for the weighted loss family.

    kind selects the base loss; the remaining fields apply to the variants
    that use them (gamma to Focal, sigma to NSM, the rest to SoftTriple).
    """

    kind: str = "CE"
    focal_gamma: float = 2.0
    sigma: float = 0.25
    scale_lambda: float = 20.0
    delta: float = 0.01
    entropy_scale: float = 0.1
    centers_per_class: int = 2

    def __post_init__(self):
        if self.kind not in ("CE", "Focal", "NSM", "SoftTriple"):
            raise InvalidParamsError(f"unknown loss kind {self.kind!r}")
        if self.focal_gamma < 0:
            raise InvalidParamsError("focal_gamma must be >= 0")
        if self.sigma <= 0:
            raise InvalidParamsError("sigma must be positive")
        if self.scale_lambda <= 0:
            raise InvalidParamsError("scale_lambda must be positive")
        if self.entropy_scale <= 0:
            raise InvalidParamsError("entropy_scale must be positive")
        if self.centers_per_class < 1:
            raise InvalidParamsError("centers_per_class must be >= 1")


def dsb_weights(scales) -> DsbWeights:
    """Normalize inverse scales into per-class weights summing to one."""
    s = np.asarray(scales, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise InvalidInputError(f"scales must be a non-empty 1-D sequence, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("scales contain non-finite values")
    if np.any(s <= 0):
        raise InvalidScaleError("all scales must be positive (clamp upstream)")
    inv = 1.0 / s
    return DsbWeights(per_class=inv / inv.sum(), source_scales=s)


def _multiplier_for(weights, label: int, class_count: int) -> float:
    if isinstance(weights, DsbWeights):
        vec = weights.per_class
    elif np.isscalar(weights):
        return float(weights)
    else:
        vec = np.asarray(weights, dtype=np.float64)
    if vec.shape[0] != class_count:
        raise InvalidInputError(
            f"weight vector length {vec.shape[0]} != class count {class_count}"
        )
    return float(vec[label])


def _check_label(label: int, class_count: int) -> int:
    label = int(label)
    if not 0 <= label < class_count:
        raise InvalidLabelError(f"label {label} out of range for {class_count} classes")
    return label


def dsb_ce(logits, label: int, weights) -> tuple[float, np.ndarray]:
    """Weighted cross-entropy over raw logits.

    Returns (loss, gradient w.r.t. logits) with
    loss = w_y * (-log softmax(logits)_y) and gradient
    w_y * (softmax - onehot_y).
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1:
        raise InvalidInputError(f"logits must be 1-D, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("logits contain non-finite values")
    c = z.shape[0]
    label = _check_label(label, c)
    w = _multiplier_for(weights, label, c)
    shifted = z - z.max()
    log_norm = math.log(np.exp(shifted).sum())
    log_p = shifted - log_norm
    loss = -w * float(log_p[label])
    grad = np.exp(log_p)
    grad[label] -= 1.0
    return loss, w * grad


def dsb_focal(p_t: float, gamma: float = 2.0, weight: float = 1.0) -> float:
    """Weighted focal term w * (1 - p_t)^gamma * (-ln p_t)."""
    p_t = float(p_t)
    if not (math.isfinite(p_t) and 0.0 < p_t <= 1.0):
        raise InvalidProbabilityError(f"p_t must lie in (0, 1], got {p_t}")
    if gamma < 0:
        raise InvalidParamsError(f"gamma must be >= 0, got {gamma}")
    return float(weight) * (1.0 - p_t) ** gamma * (-math.log(p_t))


def _normalize_columns(mat: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(mat, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateVectorError(f"{what} contains a zero-norm column")
    return mat / norms, norms


def dsb_nsm(
    embedding,
    class_weights,
    label: int,
    sigma: float,
    weight: float = 1.0,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Weighted normalized-softmax loss with analytic gradients.

    Both the embedding and each classifier column are L2-normalized before
    the cosine logits s_j = w_hat_j . z_hat / sigma. Returns
    (loss, d loss/d embedding, d loss/d class_weights).
    """
    z = np.asarray(embedding, dtype=np.float64)
    wmat = np.asarray(class_weights, dtype=np.float64)
    if z.ndim != 1 or wmat.ndim != 2 or wmat.shape[0] != z.shape[0]:
        raise InvalidInputError(
            f"need embedding (d,) and class_weights (d, C); got {z.shape} and {wmat.shape}"
        )
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(wmat))):
        raise InvalidInputError("inputs contain non-finite values")
    if sigma <= 0:
        raise InvalidParamsError(f"sigma must be positive, got {sigma}")
    c = wmat.shape[1]
    label = _check_label(label, c)
    w_y = _multiplier_for(weight, label, c)

    z_norm = np.linalg.norm(z)
    if z_norm == 0.0:
        raise DegenerateVectorError("embedding has zero norm")
    z_hat = z / z_norm
    w_hat, w_norms = _normalize_columns(wmat, "class_weights")

    s = (w_hat.T @ z_hat) / sigma
    shifted = s - s.max()
    p = np.exp(shifted)
    p /= p.sum()
    loss = -w_y * float(shifted[label] - math.log(np.exp(shifted).sum()))

    g_s = w_y * p
    g_s[label] -= w_y
    # chain rule through both L2 normalizations
    g_zhat = (w_hat @ g_s) / sigma
    grad_z = (g_zhat - z_hat * float(z_hat @ g_zhat)) / z_norm
    g_what = np.outer(z_hat, g_s) / sigma
    proj = np.sum(w_hat * g_what, axis=0)
    grad_w = (g_what - w_hat * proj) / w_norms
    return loss, grad_z, grad_w


def dsb_soft_triple(
    embedding,
    centers,
    label: int,
    params: LossParams | None = None,
    weight: float = 1.0,
) -> float:
    """Weighted soft-triple loss over K centers per class (forward only).

    The relaxed similarity to class c pools the per-center cosine
    similarities with an entropy-regularized softmax:
        D_c = sum_k softmax_k(sim_ck / entropy_scale) * sim_ck
    and the loss applies a margin delta to the true class:
        -w_y * log( exp(lambda (D_y - delta))
                    / (exp(lambda (D_y - delta)) + sum_{j != y} exp(lambda D_j)) )
    """
    if params is None:
        params = LossParams(kind="SoftTriple")
    z = np.asarray(embedding, dtype=np.float64)
    w = np.asarray(centers, dtype=np.float64)
    if z.ndim != 1 or w.ndim != 3 or w.shape[0] != z.shape[0]:
        raise InvalidInputError(
            f"need embedding (d,) and centers (d, C, K); got {z.shape} and {w.shape}"
        )
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(w))):
        raise InvalidInputError("inputs contain non-finite values")
    d, c, k = w.shape
    label = _check_label(label, c)
    w_y = float(weight)

    z_norm = np.linalg.norm(z)
    if z_norm == 0.0:
        raise DegenerateVectorError("embedding has zero norm")
    z_hat = z / z_norm
    center_norms = np.linalg.norm(w, axis=0)
    if np.any(center_norms == 0.0):
        raise DegenerateVectorError("centers contain a zero-norm vector")
    w_hat = w / center_norms

    sims = np.einsum("d,dck->ck", z_hat, w_hat)
    att = sims / params.entropy_scale
    att = np.exp(att - att.max(axis=1, keepdims=True))
    att /= att.sum(axis=1, keepdims=True)
    relaxed = np.sum(att * sims, axis=1)

    logits = params.scale_lambda * relaxed
    logits[label] -= params.scale_lambda * params.delta
    shifted = logits - logits.max()
    return -w_y * float(shifted[label] - math.log(np.exp(shifted).sum()))
