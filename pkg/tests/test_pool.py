from collections import deque

import numpy as np
import pytest

from semscale.errors import (
    CapacityExceededError,
    InvalidInputError,
    MissingClassError,
    PoolUnderflowError,
    ShapeMismatchError,
)
from semscale.geometry import LabeledFeatureSet
from semscale.imbalance import imbalance_report
from semscale.pool import REDUCED_DIM, StageSchedule, StoragePool, pool_scales, reduce_features


def batch(rng, size, dim=REDUCED_DIM, n_classes=3):
    return rng.normal(size=(dim, size)), rng.integers(0, n_classes, size=size)


class TestStageSchedule:
    def test_boundaries(self):
        s = StageSchedule(warm_epochs=5)
        assert s.stage(1) == 1
        assert s.stage(2) == 2
        assert s.stage(5) == 2
        assert s.stage(6) == 3
        assert s.stage(100) == 3

    def test_bad_epoch(self):
        with pytest.raises(InvalidInputError):
            StageSchedule(5).stage(0)


class TestReduceFeatures:
    def test_constant_vector_stays_constant(self):
        out = reduce_features(np.full((2048, 1), 3.25))
        np.testing.assert_array_equal(out, np.full((64, 1), 3.25))

    def test_hand_window_means(self):
        vec = np.arange(1.0, 129.0).reshape(-1, 1)
        out = reduce_features(vec)
        np.testing.assert_allclose(out[:, 0], np.arange(1.5, 129.0, 2.0))

    def test_identity_at_target_dim(self, rng):
        z = rng.normal(size=(64, 5))
        out = reduce_features(z)
        np.testing.assert_array_equal(out, z)
        out[0, 0] += 1.0  # returned array must not alias the input
        assert z[0, 0] != out[0, 0]

    def test_indivisible_rejected_without_pad(self):
        with pytest.raises(ShapeMismatchError):
            reduce_features(np.ones((100, 2)))

    def test_zero_padding(self):
        out = reduce_features(np.ones((2, 3)), pad=True)
        assert out.shape == (64, 3)
        np.testing.assert_array_equal(out[:2], np.ones((2, 3)))
        np.testing.assert_array_equal(out[2:], np.zeros((62, 3)))


class TestStoragePool:
    def test_push_fills(self, rng):
        pool = StoragePool(capacity=100)
        pool.push_batch(*batch(rng, 32))
        assert len(pool) == 32
        assert pool.oldest_batch_size == 32

    def test_epoch_one_reaches_capacity_exactly(self, rng):
        n = 101
        pool = StoragePool(capacity=n)
        for start in range(0, n, 32):
            size = min(32, n - start)
            pool.push_batch(*batch(rng, size))
        assert len(pool) == n

    def test_fifo_pop_order(self, rng):
        pool = StoragePool(capacity=10, dim=2)
        pool.push_batch(np.array([[1.0], [1.0]]), [0])
        pool.push_batch(np.array([[2.0], [2.0]]), [1])
        pool.pop_oldest(1)
        feats, labels = pool.snapshot()
        np.testing.assert_array_equal(feats, [[2.0], [2.0]])
        assert list(labels) == [1]

    def test_ragged_final_batch(self, rng):
        pool = StoragePool(capacity=81)
        for size in (32, 32, 17):
            pool.push_batch(*batch(rng, size))
        pool.pop_oldest(32)
        assert len(pool) == 49
        assert pool.oldest_batch_size == 32

    def test_overflow_rejected(self, rng):
        pool = StoragePool(capacity=40)
        pool.push_batch(*batch(rng, 32))
        with pytest.raises(CapacityExceededError):
            pool.push_batch(*batch(rng, 32))

    def test_underflow_rejected(self, rng):
        pool = StoragePool(capacity=8)
        with pytest.raises(PoolUnderflowError):
            pool.pop_oldest(1)

    def test_matches_reference_queue(self, rng):
        """Random interleaved push/pop schedules against a plain deque."""
        for trial in range(200):
            capacity = int(rng.integers(5, 120))
            pool = StoragePool(capacity=capacity, dim=3)
            ref: deque = deque()
            for _ in range(int(rng.integers(3, 40))):
                if ref and rng.random() < 0.45:
                    count = int(rng.integers(1, len(ref) + 1))
                    pool.pop_oldest(count)
                    for _ in range(count):
                        ref.popleft()
                else:
                    room = capacity - len(ref)
                    if room == 0:
                        continue
                    size = int(rng.integers(1, room + 1))
                    feats = rng.normal(size=(3, size))
                    labels = rng.integers(0, 4, size=size)
                    pool.push_batch(feats, labels)
                    for j in range(size):
                        ref.append((feats[:, j].copy(), int(labels[j])))
                assert len(pool) == len(ref)
                feats, labels = pool.snapshot()
                for j, (rf, rl) in enumerate(ref):
                    np.testing.assert_array_equal(feats[:, j], rf)
                    assert labels[j] == rl

    def test_determinism(self, rng):
        schedule = [("push", 16), ("push", 16), ("pop", 16), ("push", 7), ("pop", 10)]
        snaps = []
        for _ in range(2):
            r = np.random.default_rng(99)
            pool = StoragePool(capacity=64, dim=4)
            for op, k in schedule:
                if op == "push":
                    pool.push_batch(r.normal(size=(4, k)), r.integers(0, 3, size=k))
                else:
                    pool.pop_oldest(k)
            snaps.append(pool.snapshot())
        np.testing.assert_array_equal(snaps[0][0], snaps[1][0])
        np.testing.assert_array_equal(snaps[0][1], snaps[1][1])


class TestPoolScales:
    def _filled_pool(self, dataset):
        pool = StoragePool(capacity=dataset.count, dim=dataset.dim)
        pool.push_batch(dataset.values, dataset.labels)
        return pool

    def test_equals_direct_report(self, rng):
        vals = rng.normal(size=(REDUCED_DIM, 120))
        labels = rng.integers(0, 3, size=120)
        ds = LabeledFeatureSet(vals, labels)
        pool = self._filled_pool(ds)
        got = pool_scales(pool, alpha=1.5)
        want = imbalance_report(ds, alpha=1.5)
        np.testing.assert_allclose(got.raw_scales, want.raw_scales, atol=1e-12)
        np.testing.assert_allclose(got.loss_weights, want.loss_weights, atol=1e-12)

    def test_stale_same_distribution_features_shift_little(self):
        hits = 0
        for seed in range(6):
            rng = np.random.default_rng(seed)
            fresh = [rng.normal(size=(16, 400)) for _ in range(2)]
            stale = rng.normal(size=(16, 400))  # class 1 replaced, same distribution
            labels = np.array([0] * 400 + [1] * 400)
            rep_a = imbalance_report(LabeledFeatureSet(np.hstack(fresh), labels))
            rep_b = imbalance_report(LabeledFeatureSet(np.hstack([fresh[0], stale]), labels))
            shift = abs(rep_a.raw_scales[1] - rep_b.raw_scales[1]) / rep_a.raw_scales[1]
            hits += shift < 0.05
        assert hits >= 5

    def test_degenerate_class_in_pool(self, rng):
        pool = StoragePool(capacity=20, dim=8)
        pool.push_batch(rng.normal(size=(8, 15)), np.zeros(15, dtype=int))
        pool.push_batch(np.tile(rng.normal(size=(8, 1)), (1, 5)), np.ones(5, dtype=int))
        rep = pool_scales(pool, alpha=1.0)
        by_id = {c.class_id: c for c in rep.classes}
        assert by_id[1].degenerate
        assert rep.loss_weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_missing_class_strict_raises(self, rng):
        pool = StoragePool(capacity=30, dim=4)
        pool.push_batch(rng.normal(size=(4, 20)), rng.integers(0, 2, size=20))
        with pytest.raises(MissingClassError):
            pool_scales(pool, expected_classes=[0, 1, 2])

    def test_missing_class_flagged_when_not_strict(self, rng):
        pool = StoragePool(capacity=30, dim=4)
        pool.push_batch(rng.normal(size=(4, 20)), rng.integers(0, 2, size=20))
        rep = pool_scales(pool, expected_classes=[0, 1, 2], strict=False)
        assert rep.missing_class_ids == (2,)
        assert sorted(c.class_id for c in rep.classes) == [0, 1]
