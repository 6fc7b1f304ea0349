import numpy as np
import pytest

from magweight.classify import (
    FittedClassifier,
    LabeledDataset,
    fit,
    load_classifier,
    save_classifier,
    tune_scales,
)
from magweight.core import PointCloud, weighting
from magweight.errors import InvalidInput


def blobs(rng, centers, n_per, spread=0.4):
    points, labels = [], []
    for label, center in enumerate(centers):
        points.append(rng.normal(loc=center, scale=spread, size=(n_per, len(center))))
        labels.append(np.full(n_per, label))
    return LabeledDataset(PointCloud(np.vstack(points)), np.concatenate(labels))


class TestFit:
    def test_single_point_class(self):
        data = LabeledDataset(PointCloud(np.array([[0.0, 0.0]])), np.array([0]))
        model = fit(data)
        np.testing.assert_array_equal(model.states[0].weights, [1.0])

    def test_simplex_classes_have_equal_weights(self):
        # two classes laid out as regular simplices: symmetry forces equal
        # cached weights, matching the closed form 1/(1+(n-1)e^-d)
        d = 1.0
        a = np.eye(4) * (d / np.sqrt(2.0))
        b = np.eye(4) * (d / np.sqrt(2.0)) + 10.0
        data = LabeledDataset(
            PointCloud(np.vstack([a, b])), np.array([0] * 4 + [1] * 4)
        )
        model = fit(data)
        expect = 1.0 / (1.0 + 3.0 * np.exp(-d))
        for state in model.states:
            np.testing.assert_allclose(state.weights, expect, atol=1e-10)

    def test_empty_class_rejected(self):
        data = LabeledDataset(
            PointCloud(np.array([[0.0], [1.0]])), np.array([0, 0]), label_names=("a", "b")
        )
        with pytest.raises(InvalidInput):
            fit(data)

    def test_state_sizes_match_split_counts(self):
        rng = np.random.default_rng(0)
        data = blobs(rng, [(0.0, 0.0), (5.0, 5.0)], n_per=20)
        model = fit(data)
        assert [len(s.cloud) for s in model.states] == [20, 20]

    def test_per_class_scales(self):
        rng = np.random.default_rng(1)
        data = blobs(rng, [(0.0, 0.0), (5.0, 5.0)], n_per=8)
        model = fit(data, scales=[0.5, 2.0])
        assert model.states[0].cloud.scale == 0.5
        assert model.states[1].cloud.scale == 2.0

    def test_null_threshold_requires_percentile(self):
        rng = np.random.default_rng(2)
        data = blobs(rng, [(0.0, 0.0), (5.0, 5.0)], n_per=5)
        with pytest.raises(InvalidInput):
            fit(data, scale_mode="abs", null_threshold=0.9)
        with pytest.raises(InvalidInput):
            fit(data, scale_mode="percentile", null_threshold=1.5)


class TestScore:
    def test_far_point_scores(self):
        rng = np.random.default_rng(3)
        data = blobs(rng, [(0.0, 0.0)], n_per=12, spread=0.5)
        x = np.array([100.0, 0.0])  # distance >= 30 at t=1
        abs_model = fit(data)
        w = abs_model.score(x)[0]
        assert abs(w - 1.0) <= 1e-10
        pct_model = fit(data, scale_mode="percentile")
        assert pct_model.score(x)[0] == 1.0

    def test_interior_point_scores_below_class_median(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(200, 2))
        data = LabeledDataset(PointCloud(pts), np.zeros(200, dtype=int))
        model = fit(data)
        centroid = pts.mean(axis=0)
        w_new = model.score(centroid)[0]
        assert w_new < np.median(np.abs(model.states[0].weights))

    def test_scoring_path_equals_fresh_solve(self):
        rng = np.random.default_rng(5)
        data = blobs(rng, [(0.0, 0.0), (3.0, 3.0)], n_per=15)
        model = fit(data)
        for _ in range(25):
            x = rng.normal(size=2) * 2.0
            scores = model.score(x)
            for i, state in enumerate(model.states):
                full = weighting(state.cloud.append(x))
                np.testing.assert_allclose(scores[i], abs(full.weights[-1]), rtol=1e-8)

    def test_duplicate_test_point_uses_training_weight(self):
        rng = np.random.default_rng(6)
        data = blobs(rng, [(0.0, 0.0)], n_per=10)
        model = fit(data, scale_mode="percentile")
        ranked = model._sorted_weights[0]
        for j, x in enumerate(data.cloud.points):
            w_j = model.states[0].weights[j]
            rank = np.searchsorted(ranked, w_j, side="right") / 10
            assert model.score(x)[0] <= rank + 1e-12

    def test_percentile_scores_in_unit_interval(self):
        rng = np.random.default_rng(7)
        data = blobs(rng, [(0.0, 0.0), (2.0, 2.0)], n_per=30)
        model = fit(data, scale_mode="percentile")
        for _ in range(50):
            s = model.score(rng.normal(size=2) * 3.0)
            assert ((s > 0.0) & (s <= 1.0)).all()

    def test_abs_scores_nonnegative(self):
        rng = np.random.default_rng(8)
        data = blobs(rng, [(0.0, 0.0), (2.0, 2.0)], n_per=30)
        model = fit(data)
        for _ in range(50):
            assert (model.score(rng.normal(size=2) * 3.0) >= 0.0).all()


class TestPredict:
    def test_min_scaled_weight_wins(self):
        # the figure-style situation: an interior weight near 0.03 against a
        # boundary-ish weight near 0.5 must pick the interior class
        rng = np.random.default_rng(9)
        inner = rng.normal(size=(60, 2)) * 0.8
        outer = rng.normal(size=(60, 2)) * 0.8 + np.array([6.0, 0.0])
        data = LabeledDataset(
            PointCloud(np.vstack([outer, inner])), np.array([0] * 60 + [1] * 60)
        )
        model = fit(data)
        x = np.array([6.1, 0.2])  # interior to class 0
        scores = model.score(x)
        assert scores[0] < scores[1]
        assert model.predict(x) == 0
        y = np.array([-0.3, 0.1])  # interior to class 1
        assert model.predict(y) == 1

    def test_all_high_percentiles_give_null(self):
        rng = np.random.default_rng(10)
        data = blobs(rng, [(0.0, 0.0), (4.0, 4.0)], n_per=20)
        model = fit(data, scale_mode="percentile", null_threshold=1 - 1e-11)
        assert model.predict(np.array([500.0, -500.0])) is None
        # a genuinely interior point is never rejected
        assert model.predict(np.array([0.05, -0.02])) == 0

    def test_tie_breaks_to_lowest_class(self):
        model = fit(
            LabeledDataset(
                PointCloud(np.array([[0.0], [10.0]])), np.array([0, 1])
            )
        )
        x = np.array([5.0])  # equidistant: identical scores by symmetry
        scores = model.score(x)
        assert scores[0] == scores[1]
        assert model.predict(x) == 0

    def test_isometry_invariance_of_predictions(self):
        rng = np.random.default_rng(11)
        data = blobs(rng, [(0.0, 0.0), (3.0, 0.0)], n_per=25)
        tests = rng.normal(size=(40, 2)) * 2.0 + np.array([1.5, 0.0])
        base = fit(data).predict_batch(tests)
        theta = 0.77
        q = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        shift = np.array([-4.0, 9.0])
        moved = LabeledDataset(
            PointCloud(data.cloud.points @ q.T + shift), data.labels
        )
        rotated = fit(moved).predict_batch(tests @ q.T + shift)
        assert base == rotated

    def test_null_rule_direction(self):
        # lowering the threshold can only turn labeled predictions into NULL,
        # never the reverse
        rng = np.random.default_rng(12)
        data = blobs(rng, [(0.0, 0.0), (4.0, 4.0)], n_per=20)
        lo = fit(data, scale_mode="percentile", null_threshold=0.5)
        hi = fit(data, scale_mode="percentile", null_threshold=0.95)
        for _ in range(40):
            x = rng.normal(size=2) * 4.0
            if hi.predict(x) is None:
                assert lo.predict(x) is None


class TestTuneScales:
    def test_single_grid_value(self):
        rng = np.random.default_rng(13)
        data = blobs(rng, [(0.0, 0.0), (4.0, 4.0)], n_per=10)
        np.testing.assert_array_equal(tune_scales(data, [2.5], folds=2), [2.5, 2.5])

    def test_argmax_property(self):
        rng = np.random.default_rng(14)
        data = blobs(rng, [(0.0, 0.0), (3.0, 3.0)], n_per=12)
        grid = [0.01, 1.0, 100.0]
        ts = tune_scales(data, grid, folds=3, seed=5)
        assert set(ts).issubset(set(grid))

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(15)
        pts = rng.uniform(size=(60, 2))
        labels = ((pts[:, 0] * 2).astype(int) + (pts[:, 1] * 2).astype(int)) % 2
        data = LabeledDataset(PointCloud(pts), labels)
        a = tune_scales(data, [0.5, 1.0, 2.0, 4.0], folds=3, seed=7)
        b = tune_scales(data, [0.5, 1.0, 2.0, 4.0], folds=3, seed=7)
        np.testing.assert_array_equal(a, b)

    def test_bad_grid_rejected(self):
        rng = np.random.default_rng(16)
        data = blobs(rng, [(0.0, 0.0), (4.0, 4.0)], n_per=6)
        with pytest.raises(InvalidInput):
            tune_scales(data, [], folds=2)
        with pytest.raises(InvalidInput):
            tune_scales(data, [-1.0, 1.0], folds=2)
        with pytest.raises(InvalidInput):
            tune_scales(data, [1.0], folds=1)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(17)
        data = blobs(rng, [(0.0, 0.0), (4.0, 4.0)], n_per=12)
        model = fit(data, scales=[0.8, 1.2], scale_mode="percentile", null_threshold=0.99)
        path = tmp_path / "model.json"
        save_classifier(model, path)
        loaded = load_classifier(path)
        assert loaded.scale_mode == "percentile"
        assert loaded.null_threshold == 0.99
        np.testing.assert_array_equal(loaded.scales, model.scales)
        tests = rng.normal(size=(20, 2)) * 3.0
        for x in tests:
            np.testing.assert_allclose(loaded.score(x), model.score(x), rtol=1e-10)
        assert loaded.predict_batch(tests) == model.predict_batch(tests)

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(InvalidInput):
            load_classifier(path)
