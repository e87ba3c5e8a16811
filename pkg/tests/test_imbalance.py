import numpy as np
import pytest

from semscale.errors import (
    DegenerateInputError,
    InvalidParamsError,
    NeedsTwoClassesError,
    ShapeMismatchError,
)
from semscale.geometry import LabeledFeatureSet, VolumeParams, feature_volume
from semscale.imbalance import (
    class_centers,
    combined_scale,
    imbalance_report,
    interference_weights,
    pearson,
)


def two_gaussians(rng, d=8, n=500, stds=(1.0, 2.0), sep=6.0):
    blocks, labels = [], []
    for cid, s in enumerate(stds):
        mu = np.zeros(d)
        mu[0] = cid * sep
        blocks.append(rng.normal(loc=mu, scale=s, size=(n, d)).T)
        labels.extend([cid] * n)
    return LabeledFeatureSet(np.hstack(blocks), np.array(labels))


class TestClassCenters:
    def test_midpoint(self):
        ds = LabeledFeatureSet(np.array([[0.0, 2.0], [0.0, 2.0]]), [3, 3])
        cc = class_centers(ds)
        np.testing.assert_allclose(cc.centers[0], [1.0, 1.0])
        assert list(cc.class_ids) == [3]

    def test_single_sample_class(self):
        ds = LabeledFeatureSet(np.array([[5.0], [7.0]]), [1])
        np.testing.assert_array_equal(class_centers(ds).centers[0], [5.0, 7.0])

    def test_matches_bruteforce_means(self, rng):
        vals = rng.normal(size=(5, 60))
        labels = rng.integers(0, 4, size=60)
        ds = LabeledFeatureSet(vals, labels)
        cc = class_centers(ds)
        for i, cid in enumerate(cc.class_ids):
            cols = vals[:, labels == cid]
            manual = cols.sum(axis=1) / cols.shape[1]
            np.testing.assert_allclose(cc.centers[i], manual, atol=1e-12)


class TestInterferenceWeights:
    def test_two_centers(self):
        w = interference_weights(np.array([[0.0, 0.0], [2.0, 0.0]]))
        np.testing.assert_allclose(w, [2.0, 2.0])

    def test_collinear_three(self):
        w = interference_weights(np.array([[0.0], [1.0], [2.0]]))
        np.testing.assert_allclose(w, [1.5, 1.0, 1.5])

    def test_coincident_centers(self):
        w = interference_weights(np.ones((4, 3)))
        np.testing.assert_array_equal(w, np.zeros(4))

    def test_needs_two(self):
        with pytest.raises(NeedsTwoClassesError):
            interference_weights(np.ones((1, 3)))


class TestCombinedScale:
    def test_hand_log2_values(self):
        s = combined_scale([1.0, 0.5], [1.0, 0.5], alpha=1.0)
        np.testing.assert_allclose(s, [1.0, 0.5 * np.log2(1.5)], atol=1e-9)
        assert s[1] == pytest.approx(0.292481, abs=1e-6)

    def test_equal_weights_preserve_ordering(self, rng):
        raw = rng.uniform(0.1, 1.0, size=6)
        s = combined_scale(raw, np.full(6, 3.3), alpha=2.0)
        assert list(np.argsort(s)) == list(np.argsort(raw))

    def test_alpha_below_one_rejected(self):
        with pytest.raises(InvalidParamsError):
            combined_scale([1.0], [1.0], alpha=0.5)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ShapeMismatchError):
            combined_scale([1.0, 0.5], [1.0], alpha=1.0)

    def test_zero_weight_corner_floored(self):
        # alpha=1 with some w_norm=0 would zero the combined scale; the
        # floor keeps it positive so 1/S stays finite
        s = combined_scale([1.0, 1.0], [0.0, 5.0], alpha=1.0)
        assert s[0] == pytest.approx(1e-6)
        assert s[1] == pytest.approx(1.0)

    def test_alpha_monotonically_flattens_weights(self, rng):
        w = rng.uniform(0.2, 4.0, size=5)
        ratios = []
        for alpha in (1.0, 1.5, 2.0, 2.5, 3.0):
            smoothed = np.log2(alpha + w / w.max())
            ratios.append(smoothed.max() / smoothed.min())
        assert all(b < a for a, b in zip(ratios, ratios[1:]))


class TestPearson:
    def test_perfect_linear(self, rng):
        x = rng.normal(size=40)
        assert pearson(x, 2 * x + 3) == pytest.approx(1.0, abs=1e-12)

    def test_antilinear(self, rng):
        x = rng.normal(size=40)
        assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_value(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    def test_symmetry(self, rng):
        x, y = rng.normal(size=20), rng.normal(size=20)
        assert pearson(x, y) == pytest.approx(pearson(y, x), abs=1e-15)

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateInputError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


class TestImbalanceReport:
    def test_relabeled_halves_nearly_symmetric(self):
        hits = 0
        for seed in range(8):
            rng = np.random.default_rng(seed)
            vals = rng.normal(size=(6, 4000))
            labels = np.array([0] * 2000 + [1] * 2000)
            rep = imbalance_report(LabeledFeatureSet(vals, labels), alpha=1.0)
            raw = rep.raw_scales
            close_scales = abs(raw[0] - raw[1]) / max(raw) < 0.02
            close_weights = np.allclose(rep.loss_weights, 0.5, atol=0.02)
            hits += close_scales and close_weights
        assert hits >= 7

    def test_wider_class_has_larger_raw_scale(self, rng):
        ds = two_gaussians(rng)
        rep = imbalance_report(ds, alpha=1.0)
        raw = {c.class_id: c.raw_scale for c in rep.classes}
        assert raw[1] > raw[0]
        vols = {c: feature_volume(ds.class_matrix(c)) for c in (0, 1)}
        assert vols[1] > vols[0]

    def test_weights_sum_to_one(self, rng):
        ds = two_gaussians(rng, stds=(0.5, 1.0), n=80)
        rep = imbalance_report(ds, alpha=2.0, dataset_kind="long-tailed")
        assert rep.loss_weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(rep.loss_weights > 0)

    def test_max_normalization_is_exact(self, rng):
        vals = rng.normal(size=(4, 90))
        labels = rng.integers(0, 3, size=90)
        rep = imbalance_report(LabeledFeatureSet(vals, labels))
        assert rep.raw_scales.max() == 1.0

    def test_translation_invariance(self, rng):
        vals = rng.normal(size=(5, 120))
        labels = rng.integers(0, 3, size=120)
        shift = rng.normal(size=(5, 1)) * 10
        rep_a = imbalance_report(LabeledFeatureSet(vals, labels))
        rep_b = imbalance_report(LabeledFeatureSet(vals + shift, labels))
        assert np.all(np.abs(rep_a.raw_scales - rep_b.raw_scales) < 1e-10)
        wa = np.array([c.interference_weight for c in rep_a.classes])
        wb = np.array([c.interference_weight for c in rep_b.classes])
        assert np.all(np.abs(wa - wb) < 1e-10)

    def test_degenerate_class_clamped(self):
        rng = np.random.default_rng(0)
        vals = np.hstack([rng.normal(size=(3, 40)), np.tile([[1.0], [2.0], [3.0]], (1, 5))])
        labels = np.array([0] * 40 + [1] * 5)
        rep = imbalance_report(LabeledFeatureSet(vals, labels))
        by_id = {c.class_id: c for c in rep.classes}
        assert by_id[1].degenerate and not by_id[0].degenerate
        assert by_id[1].raw_scale == pytest.approx(1e-6)
        assert rep.loss_weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_single_class_rejected(self, rng):
        ds = LabeledFeatureSet(rng.normal(size=(3, 10)), np.zeros(10, dtype=int))
        with pytest.raises(NeedsTwoClassesError):
            imbalance_report(ds)

    def test_alpha_spread_shrinks_with_alpha(self, rng):
        ds = two_gaussians(rng, n=60)
        spreads = []
        for alpha in (1.0, 1.5, 2.0, 2.5, 3.0):
            rep = imbalance_report(ds, alpha=alpha)
            sw = np.array([c.smoothed_weight for c in rep.classes])
            spreads.append(sw.max() / sw.min())
        assert all(b <= a for a, b in zip(spreads, spreads[1:]))

    def test_classes_sorted_by_id(self, rng):
        vals = rng.normal(size=(3, 60))
        labels = rng.permutation(np.repeat([7, 2, 5], 20))
        rep = imbalance_report(LabeledFeatureSet(vals, labels))
        assert [c.class_id for c in rep.classes] == [2, 5, 7]
