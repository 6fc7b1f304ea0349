import numpy as np
import pytest

from magweight.active import (
    ALSession,
    AutomatedOracle,
    BatchMismatch,
    KernelRidgeModel,
    laplacian_kernel,
    run_session,
    train_classifier,
    uncertainty_query,
    weighting_query,
)
from magweight.classify import LabeledDataset
from magweight.core import PointCloud
from magweight.errors import IllConditioned, InvalidInput


def blob_pool(rng, n_per=30, gap=6.0, dim=2):
    a = rng.normal(size=(n_per, dim))
    b = rng.normal(size=(n_per, dim)) + gap
    pts = np.vstack([a, b])
    labels = np.array([0] * n_per + [1] * n_per)
    perm = rng.permutation(len(labels))
    return LabeledDataset(PointCloud(pts[perm]), labels[perm])


def make_session(pool, test, **kwargs):
    defaults = dict(strategy="weighting", budget=40, seed=0)
    defaults.update(kwargs)
    session = ALSession(
        pool.cloud.points,
        np.arange(pool.n_classes),
        test.cloud.points,
        test.labels,
        **defaults,
    )
    return session


def seed_per_class(session, pool):
    pairs = [(int(np.flatnonzero(pool.labels == c)[0]), int(c)) for c in (0, 1)]
    session.seed_labels(pairs)


class TestTrainClassifier:
    def test_two_points_separate(self):
        model = train_classifier(np.array([[0.0], [4.0]]), [-1, 1], lam=1e-6)
        f = model.decision(np.array([[0.0], [4.0]])).reshape(-1)
        assert f[0] < 0 < f[1]

    def test_large_ridge_flattens(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(20, 2))
        labels = (pts[:, 0] > 0).astype(int)
        model = train_classifier(pts, labels, lam=1e9)
        assert np.abs(model.coef).max() < 1e-6
        f = model.decision(rng.normal(size=(10, 2)))
        assert np.abs(f - f[0]).max() < 1e-6

    def test_separable_blobs_high_accuracy(self):
        rng = np.random.default_rng(1)
        pool = blob_pool(rng, n_per=50)
        model = train_classifier(pool.cloud.points, pool.labels, gamma=0.1, lam=1e-3)
        predicted = model.predict(pool.cloud.points)
        assert np.mean(predicted == pool.labels) >= 0.99
        # dense oracle: the saddle system solved with an explicit inverse
        k = laplacian_kernel(pool.cloud.points, pool.cloud.points, 0.1)
        m = k.shape[0]
        sys_ = np.zeros((m + 1, m + 1))
        sys_[0, 1:] = 1.0
        sys_[1:, 0] = 1.0
        sys_[1:, 1:] = k + 1e-3 * np.eye(m)
        y = np.where(pool.labels == 1, 1.0, -1.0)
        sol = np.linalg.inv(sys_) @ np.concatenate([[0.0], y])
        np.testing.assert_allclose(model.coef, sol[1:], atol=1e-8)

    def test_singular_without_ridge(self):
        pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(IllConditioned):
            train_classifier(pts, [0, 1, 1], lam=0.0)

    def test_multiclass_one_vs_rest(self):
        rng = np.random.default_rng(2)
        centers = [(0.0, 0.0), (8.0, 0.0), (0.0, 8.0)]
        pts = np.vstack([rng.normal(size=(15, 2)) + c for c in centers])
        labels = np.repeat([0, 1, 2], 15)
        model = train_classifier(pts, labels)
        assert np.mean(model.predict(pts) == labels) >= 0.95


class TestQueries:
    def test_weighting_query_line_geometry(self):
        # three collinear equally spaced points in one predicted class:
        # the endpoints carry max weight, the middle carries min
        pool = np.array([[0.0, 0.0], [5.0, 0.0], [10.0, 0.0], [200.0, 200.0]])
        labels = np.array([0, 0, 0, 1])
        test = np.array([[0.0, 1.0], [200.0, 199.0]])
        session = ALSession(pool, np.array([0, 1]), test, np.array([0, 1]), budget=40)
        session.seed_labels([(0, 0), (3, 1)])
        predicted = session.model.predict(pool)
        assert list(predicted[:3]) == [0, 0, 0]
        picked = weighting_query(session, batch=4)
        # class 0 eligible members are the two unlabeled line points 1, 2;
        # the middle point 1 is interior (min), the end point 2 is max
        assert picked.count(1) == 1 and picked.count(2) == 1
        assert picked.index(1) < picked.index(2)

    def test_weighting_query_single_class_cap(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(12, 2))
        session = ALSession(
            pts, np.array([0, 1]), pts, np.zeros(12, dtype=int), budget=40
        )
        # both seeds in one blob: the model may predict everything one class
        session.seed_labels([(0, 0), (1, 1)])
        predicted = session.model.predict(pts)
        picked = weighting_query(session, batch=4)
        n_classes_present = len(set(predicted) & {0, 1})
        assert len(picked) <= 2 * n_classes_present
        assert all(not session.labeled_mask[i] for i in picked)

    def test_uncertainty_query_matches_sort_oracle(self):
        rng = np.random.default_rng(4)
        pool = blob_pool(rng, n_per=25)
        test = blob_pool(rng, n_per=10)
        session = make_session(pool, test, strategy="uncertainty")
        seed_per_class(session, pool)
        unlabeled = session.unlabeled_indices
        f = np.abs(session.model.decision(pool.cloud.points[unlabeled]).reshape(-1))
        expect = unlabeled[np.lexsort((unlabeled, f))[:4]].tolist()
        assert uncertainty_query(session, batch=4) == expect

    def test_uncertainty_prefers_zero_decision(self):
        pool = np.array([[0.0], [1.0], [2.0], [3.0]])
        session = ALSession(
            pool, np.array([0, 1]), pool, np.array([0, 0, 1, 1]), budget=4
        )
        session.seed_labels([(0, 0), (3, 1)])
        f = session.model.decision(pool).reshape(-1)
        picked = uncertainty_query(session, batch=1)
        assert picked[0] == session.unlabeled_indices[np.argmin(np.abs(f[1:3]))] \
            or abs(f[picked[0]]) == np.abs(f[[1, 2]]).min()


class TestSessionLoop:
    def test_budget_zero_keeps_initial_history(self):
        rng = np.random.default_rng(5)
        pool = blob_pool(rng)
        test = blob_pool(rng, n_per=12)
        report = run_session(pool, test, budget=0, seed=3)
        assert len(report.runs) == 1
        assert report.runs[0]["iteration"] == 0

    def test_partition_invariant_and_batch_growth(self):
        rng = np.random.default_rng(6)
        pool = blob_pool(rng, n_per=20)
        test = blob_pool(rng, n_per=10)
        session = make_session(pool, test, budget=12)
        seed_per_class(session, pool)
        m = len(pool)
        while not session.done:
            queries = session.queries
            assert len(queries) <= 4
            assert all(not session.labeled_mask[i] for i in queries)
            before = session.labeled_mask.sum()
            session.apply_labels([(i, int(pool.labels[i])) for i in queries])
            assert session.labeled_mask.sum() == before + len(queries)
            assert session.labeled_mask.sum() + session.unlabeled_indices.size == m

    def test_batch_mismatch_rejected(self):
        rng = np.random.default_rng(7)
        pool = blob_pool(rng, n_per=10)
        test = blob_pool(rng, n_per=5)
        session = make_session(pool, test, budget=8)
        seed_per_class(session, pool)
        stale = [i for i in range(len(pool)) if i not in session.queries][0]
        with pytest.raises(BatchMismatch):
            session.apply_labels([(stale, 0)])
        with pytest.raises(BatchMismatch):
            session.apply_labels([(session.queries[0], 0)])  # incomplete
        with pytest.raises(InvalidInput):
            session.apply_labels([(i, 99) for i in session.queries])

    def test_deterministic_reports(self):
        rng = np.random.default_rng(8)
        pool = blob_pool(rng, n_per=20)
        test = blob_pool(rng, n_per=10)
        for strategy in ("weighting", "uncertainty", "random"):
            a = run_session(pool, test, strategy=strategy, budget=16, seed=11)
            b = run_session(pool, test, strategy=strategy, budget=16, seed=11)
            assert a.runs == b.runs

    def test_random_trajectory_ignores_feature_scaling(self):
        rng = np.random.default_rng(9)
        pool = blob_pool(rng, n_per=20)
        test = blob_pool(rng, n_per=10)
        scaled_pool = LabeledDataset(
            PointCloud(pool.cloud.points * 37.0), pool.labels
        )
        scaled_test = LabeledDataset(
            PointCloud(test.cloud.points * 37.0), test.labels
        )
        a = run_session(pool, test, strategy="random", budget=16, seed=2)
        b = run_session(scaled_pool, scaled_test, strategy="random", budget=16, seed=2)
        assert [r["queried"] for r in a.runs] == [r["queried"] for r in b.runs]

    def test_full_information_limit(self):
        rng = np.random.default_rng(10)
        pool = blob_pool(rng, n_per=12)
        test = blob_pool(rng, n_per=8)
        budget = len(pool) - 2  # everything beyond the two seeds
        report = run_session(pool, test, strategy="weighting", budget=budget, seed=4)
        assert report.runs[-1]["n_labeled"] == len(pool)
        full_model = train_classifier(pool.cloud.points, pool.labels)
        full_acc = np.mean(full_model.predict(test.cloud.points) == test.labels)
        assert abs(report.runs[-1]["accuracy"] - full_acc) <= 1e-12

    def test_checkpoint_round_trip(self):
        rng = np.random.default_rng(11)
        pool = blob_pool(rng, n_per=15)
        test = blob_pool(rng, n_per=8)
        session = make_session(pool, test, strategy="random", budget=12, seed=6)
        seed_per_class(session, pool)
        session.apply_labels([(i, int(pool.labels[i])) for i in session.queries])

        clone = ALSession.from_checkpoint(session.to_checkpoint())
        assert clone.queries == session.queries
        assert clone.history == session.history
        # both copies must continue identically (rng state travels too)
        for s in (session, clone):
            while not s.done:
                s.apply_labels([(i, int(pool.labels[i])) for i in s.queries])
        assert session.history == clone.history
        assert session.queried_history == clone.queried_history

    def test_weighting_beats_or_matches_on_easy_pool(self):
        rng = np.random.default_rng(12)
        pool = blob_pool(rng, n_per=40)
        test = blob_pool(rng, n_per=20)
        report = run_session(pool, test, strategy="weighting", budget=20, seed=1)
        assert report.aggregates["final_accuracy"] >= 0.9
