"""Three-stage dynamic re-weighting trainer on a self-contained classifier.

Stage 1 (epoch 1) fills the storage pool with one reduced feature per
sample. Stage 2 (epochs 2..n) keeps refreshing the pool, one mini-batch per
iteration, under the plain base loss. Stage 3 (epochs > n) recomputes the
per-class scales from the pool each iteration and multiplies every sample's
loss by the mean-1 rescaled inverse-scale weight of its class.

The classifier is a linear softmax (or one tanh hidden layer) with
gradients derived in-module; the optimizer is plain SGD so runs are exactly
reproducible from the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVectorError, InvalidConfigError, NeedsTwoClassesError
from .geometry import LabeledFeatureSet, VolumeParams
from .imbalance import SemanticScaleReport
from .pool import REDUCED_DIM, StageSchedule, StoragePool, pool_scales, reduce_features
from .reweight import dsb_weights

__all__ = [
    "TrainConfig",
    "TraceEvent",
    "ToyClassifier",
    "TrainResult",
    "EvalResult",
    "stage_of_epoch",
    "train",
    "evaluate",
    "benchmark_config",
    "gaussian_benchmark",
]

_LOSS_KINDS = ("CE", "Focal", "NSM")


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one training run.

    ``epochs`` may be <= ``warm_epochs``, in which case the re-weighting
    stage never activates and the run equals plain training.
    """

    warm_epochs: int = 5
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 0.1
    loss_kind: str = "CE"
    alpha: float = 1.0
    epsilon: float = 1.0
    seed: int = 42
    dataset_kind: str = "balanced"
    hidden_size: int | None = None
    scale_every: int = 1
    focal_gamma: float = 2.0
    nsm_sigma: float = 0.25

    def __post_init__(self):
        if self.warm_epochs < 1:
            raise InvalidConfigError(f"warm_epochs must be >= 1, got {self.warm_epochs}")
        if self.epochs < 1:
            raise InvalidConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise InvalidConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.loss_kind not in _LOSS_KINDS:
            raise InvalidConfigError(f"loss_kind must be one of {_LOSS_KINDS}, got {self.loss_kind!r}")
        if not self.alpha >= 1:
            raise InvalidConfigError(f"alpha must be >= 1, got {self.alpha}")
        if not self.epsilon > 0:
            raise InvalidConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.hidden_size is not None and self.hidden_size < 1:
            raise InvalidConfigError(f"hidden_size must be >= 1 or None, got {self.hidden_size}")
        if self.scale_every < 1:
            raise InvalidConfigError(f"scale_every must be >= 1, got {self.scale_every}")
        if self.focal_gamma < 0:
            raise InvalidConfigError(f"focal_gamma must be >= 0, got {self.focal_gamma}")
        if not self.nsm_sigma > 0:
            raise InvalidConfigError(f"nsm_sigma must be positive, got {self.nsm_sigma}")


@dataclass(frozen=True)
class TraceEvent:
    """One training iteration: stage, loss, active weights and pool size."""

    epoch: int
    iteration: int
    stage: int
    batch_loss: float
    per_class_weights: np.ndarray
    pool_size: int


def stage_of_epoch(epoch: int, warm_epochs: int) -> int:
    """1 for the fill epoch, 2 through epoch ``warm_epochs``, 3 after."""
    return StageSchedule(warm_epochs).stage(epoch)


class ToyClassifier:
    """Linear softmax classifier, optionally behind one tanh hidden layer.

    ``loss_kind='NSM'`` swaps the affine head for a bias-free cosine head
    whose inputs and columns are L2-normalized at every forward pass.
    """

    def __init__(self, input_dim, class_count, hidden_size=None, loss_kind="CE",
                 nsm_sigma=0.25, rng=None):
        if class_count < 2:
            raise NeedsTwoClassesError(f"classifier needs >= 2 classes, got {class_count}")
        rng = np.random.default_rng() if rng is None else rng
        self.input_dim = int(input_dim)
        self.class_count = int(class_count)
        self.hidden_size = hidden_size
        self.loss_kind = loss_kind
        self.nsm_sigma = float(nsm_sigma)
        self.class_ids = np.arange(class_count, dtype=np.int64)
        feat_dim = input_dim if hidden_size is None else hidden_size
        self.params: dict[str, np.ndarray] = {}
        if hidden_size is not None:
            self.params["w1"] = rng.normal(scale=1.0 / np.sqrt(input_dim), size=(hidden_size, input_dim))
            self.params["b1"] = np.zeros(hidden_size)
        if loss_kind == "NSM":
            self.params["wn"] = rng.normal(scale=0.01, size=(feat_dim, class_count))
        else:
            self.params["w"] = rng.normal(scale=0.01, size=(class_count, feat_dim))
            self.params["b"] = np.zeros(class_count)

    def features(self, x: np.ndarray) -> np.ndarray:
        """Penultimate representation: the input, or the tanh hidden layer."""
        if self.hidden_size is None:
            return x
        return np.tanh(self.params["w1"] @ x + self.params["b1"][:, None])

    def logits(self, f: np.ndarray) -> np.ndarray:
        if self.loss_kind == "NSM":
            wn = self.params["wn"]
            f_norm = np.linalg.norm(f, axis=0, keepdims=True)
            w_norm = np.linalg.norm(wn, axis=0, keepdims=True)
            if np.any(f_norm == 0) or np.any(w_norm == 0):
                raise DegenerateVectorError("zero-norm feature or head column")
            return (wn / w_norm).T @ (f / f_norm) / self.nsm_sigma
        return self.params["w"] @ f + self.params["b"][:, None]

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(self.features(x)), axis=0)


def _softmax_columns(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=0, keepdims=True)
    p = np.exp(shifted)
    return p / p.sum(axis=0, keepdims=True)


def _head_loss_and_grad(model, f, y, sample_w, cfg):
    """Loss + gradient w.r.t. head params and features, averaged over the batch."""
    b = f.shape[1]
    cols = np.arange(b)
    grads = {}
    if model.loss_kind == "NSM":
        wn = model.params["wn"]
        fn = np.linalg.norm(f, axis=0, keepdims=True)
        wnorm = np.linalg.norm(wn, axis=0, keepdims=True)
        if np.any(fn == 0) or np.any(wnorm == 0):
            raise DegenerateVectorError("zero-norm feature or head column")
        f_hat = f / fn
        w_hat = wn / wnorm
        scores = (w_hat.T @ f_hat) / model.nsm_sigma
        p = _softmax_columns(scores)
        log_p = scores - scores.max(axis=0, keepdims=True)
        log_p -= np.log(np.exp(log_p).sum(axis=0, keepdims=True))
        loss = float(np.mean(sample_w * -log_p[y, cols]))
        g_s = p * sample_w / b
        g_s[y, cols] -= sample_w / b
        g_what = f_hat @ g_s.T / model.nsm_sigma
        grads["wn"] = (g_what - w_hat * np.sum(w_hat * g_what, axis=0, keepdims=True)) / wnorm
        g_fhat = w_hat @ g_s / model.nsm_sigma
        g_f = (g_fhat - f_hat * np.sum(f_hat * g_fhat, axis=0, keepdims=True)) / fn
        return loss, grads, g_f

    scores = model.params["w"] @ f + model.params["b"][:, None]
    p = _softmax_columns(scores)
    if cfg.loss_kind == "CE":
        log_p = scores - scores.max(axis=0, keepdims=True)
        log_p -= np.log(np.exp(log_p).sum(axis=0, keepdims=True))
        loss = float(np.mean(sample_w * -log_p[y, cols]))
        g_scores = p * sample_w / b
        g_scores[y, cols] -= sample_w / b
    else:  # Focal
        gamma = cfg.focal_gamma
        p_t = p[y, cols]
        one_minus = 1.0 - p_t
        loss = float(np.mean(sample_w * one_minus**gamma * -np.log(p_t)))
        if gamma == 0:
            dldp = -sample_w / p_t
        else:
            t1 = np.zeros_like(p_t)
            mask = one_minus > 0
            t1[mask] = gamma * one_minus[mask] ** (gamma - 1.0) * -np.log(p_t[mask])
            dldp = sample_w * (-t1 - one_minus**gamma / p_t)
        # dp_y/ds_j = p_y * (1[j=y] - p_j)
        g_scores = -p * (dldp * p_t) / b
        g_scores[y, cols] += dldp * p_t / b
    grads["w"] = g_scores @ f.T
    grads["b"] = g_scores.sum(axis=1)
    g_f = model.params["w"].T @ g_scores
    return loss, grads, g_f


def batch_loss_and_grads(model, x, y, class_multipliers, cfg):
    """Mean weighted loss over a mini-batch and analytic parameter gradients.

    ``class_multipliers`` is a length-C vector; sample i's loss is scaled by
    the multiplier of its class.
    """
    sample_w = np.asarray(class_multipliers, dtype=np.float64)[y]
    if model.hidden_size is None:
        f = x
        loss, grads, _ = _head_loss_and_grad(model, f, y, sample_w, cfg)
        return loss, grads
    pre = model.params["w1"] @ x + model.params["b1"][:, None]
    f = np.tanh(pre)
    loss, grads, g_f = _head_loss_and_grad(model, f, y, sample_w, cfg)
    g_pre = g_f * (1.0 - f * f)
    grads["w1"] = g_pre @ x.T
    grads["b1"] = g_pre.sum(axis=1)
    return loss, grads


@dataclass
class TrainResult:
    model: ToyClassifier
    trace: list[TraceEvent]
    report: SemanticScaleReport
    pool: StoragePool


def train(dataset: LabeledFeatureSet, config: TrainConfig | None = None) -> TrainResult:
    """Run the three-stage loop over the dataset.

    Per iteration: forward the batch features, reduce them to 64 dims, pop
    the oldest stored batch (from epoch 2 on), push the current one, then
    compute the loss (base loss through stage 2; scale-weighted from stage
    3, with weights recomputed from the pool every ``scale_every`` stage-3
    iterations) and take one SGD step. Fully deterministic given the seed.
    """
    if config is None:
        config = TrainConfig()
    class_ids = dataset.classes
    if class_ids.size < 2:
        raise NeedsTwoClassesError(f"training needs >= 2 classes, got {class_ids.size}")
    c = class_ids.size
    index_of = {int(cid): i for i, cid in enumerate(class_ids)}
    y_all = np.array([index_of[int(l)] for l in dataset.labels], dtype=np.int64)
    n = dataset.count

    rng = np.random.default_rng(config.seed)
    model = ToyClassifier(
        dataset.dim, c,
        hidden_size=config.hidden_size,
        loss_kind=config.loss_kind,
        nsm_sigma=config.nsm_sigma,
        rng=rng,
    )
    model.class_ids = class_ids.copy()

    pool = StoragePool(capacity=n)
    vol_params = VolumeParams(epsilon=config.epsilon)
    schedule = StageSchedule(config.warm_epochs)
    uniform = np.ones(c)
    trace: list[TraceEvent] = []
    multipliers = uniform
    stage3_iter = 0

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        stage = schedule.stage(epoch)
        for it, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            x = dataset.values[:, idx]
            y = y_all[idx]
            feats = reduce_features(model.features(x), REDUCED_DIM, pad=True)
            if epoch > 1:
                pool.pop_oldest(pool.oldest_batch_size)
            pool.push_batch(feats, dataset.labels[idx])
            if stage == 3:
                if stage3_iter % config.scale_every == 0:
                    report = pool_scales(
                        pool, alpha=config.alpha, params=vol_params,
                        expected_classes=class_ids, dataset_kind=config.dataset_kind,
                        strict=False,
                    )
                    scaled = dsb_weights(report.combined_scales).multipliers()
                    multipliers = np.ones(c)
                    for pos, cid in enumerate(report.class_ids):
                        multipliers[index_of[int(cid)]] = scaled[pos]
                stage3_iter += 1
            else:
                multipliers = uniform
            loss, grads = batch_loss_and_grads(model, x, y, multipliers, config)
            for name, g in grads.items():
                model.params[name] -= config.learning_rate * g
            trace.append(TraceEvent(
                epoch=epoch, iteration=it, stage=stage,
                batch_loss=loss, per_class_weights=multipliers.copy(),
                pool_size=len(pool),
            ))

    final_report = pool_scales(
        pool, alpha=config.alpha, params=vol_params,
        expected_classes=class_ids, dataset_kind=config.dataset_kind, strict=False,
    )
    return TrainResult(model=model, trace=trace, report=final_report, pool=pool)


@dataclass(frozen=True)
class EvalResult:
    """Top-1 metrics; confusion rows are true classes, columns predictions."""

    accuracy: float
    per_class_recall: np.ndarray
    confusion: np.ndarray
    class_ids: np.ndarray


def evaluate(model: ToyClassifier, dataset: LabeledFeatureSet) -> EvalResult:
    """Per-class recall, overall accuracy and confusion counts."""
    class_ids = model.class_ids
    index_of = {int(cid): i for i, cid in enumerate(class_ids)}
    y_true = np.array([index_of[int(l)] for l in dataset.labels], dtype=np.int64)
    y_pred = model.predict(dataset.values)
    c = class_ids.size
    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    counts = confusion.sum(axis=1)
    recall = np.divide(np.diag(confusion), counts, out=np.zeros(c), where=counts > 0)
    accuracy = float(np.trace(confusion)) / dataset.count
    return EvalResult(accuracy=accuracy, per_class_recall=recall,
                      confusion=confusion, class_ids=class_ids.copy())


#: Class layout of the built-in benchmark: (center, stddev, train count).
BENCHMARK_CLASSES = (
    ((0.0, 0.0), 1.5, 500),
    ((3.0, 0.0), 1.5, 500),
    ((1.5, 1.0), 0.4, 100),
)


def benchmark_config(seed: int = 42) -> TrainConfig:
    """Documented defaults for the built-in benchmark run."""
    return TrainConfig(seed=seed, alpha=2.0, dataset_kind="long-tailed")


def gaussian_benchmark(seed: int = 42, test_per_class: int = 500):
    """3-class 2-D benchmark: two broad overlapping head clouds and one
    tight rare class between them. The rare class has both the smallest
    spread and the fewest samples, so its semantic scale is the smallest
    and a plain loss squeezes it out almost entirely.

    Returns (train_set, test_set); the test set is balanced. Both are drawn
    from one seeded stream so paired comparisons across seeds reproduce.
    """
    rng = np.random.default_rng(seed)

    def draw(counts):
        blocks, labels = [], []
        for cid, ((center, std, _), k) in enumerate(zip(BENCHMARK_CLASSES, counts)):
            pts = rng.normal(loc=center, scale=std, size=(k, 2)).T
            blocks.append(pts)
            labels.extend([cid] * k)
        return LabeledFeatureSet(np.hstack(blocks), np.array(labels))

    train_set = draw([k for _, _, k in BENCHMARK_CLASSES])
    test_set = draw([test_per_class] * len(BENCHMARK_CLASSES))
    return train_set, test_set
