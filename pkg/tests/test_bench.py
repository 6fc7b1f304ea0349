import json

import numpy as np
import pytest

from magweight.bench import (
    accuracy_cells,
    load_baseline_accuracies,
    mean_curves,
    run_al_bench,
    run_classification_bench,
    run_null_class_bench,
    weighting_classifier,
)
from magweight.classify import LabeledDataset
from magweight.core import PointCloud
from magweight.datasets import gen_checkerboard
from magweight.errors import InvalidInput
from magweight.reports import ExperimentReport


def blob_dataset(rng, n_per=25, gap=6.0):
    pts = np.vstack([rng.normal(size=(n_per, 2)), rng.normal(size=(n_per, 2)) + gap])
    return LabeledDataset(PointCloud(pts), np.repeat([0, 1], n_per))


class TestClassificationBench:
    def test_single_run_zero_std(self):
        rng = np.random.default_rng(0)
        data = blob_dataset(rng)
        report = run_classification_bench(
            {"blobs": data}, {"weighting": weighting_classifier()}, runs=1, seed=0
        )
        cell = report.aggregates["cells"]["blobs|weighting"]
        assert cell["std"] == 0.0
        assert cell["n"] == 1

    def test_aggregates_recompute_from_runs(self):
        rng = np.random.default_rng(1)
        data = blob_dataset(rng)
        report = run_classification_bench(
            {"blobs": data}, {"weighting": weighting_classifier()}, runs=4, seed=2
        )
        assert report.aggregates["cells"] == accuracy_cells(report.runs)

    def test_rejects_zero_runs(self):
        rng = np.random.default_rng(2)
        with pytest.raises(InvalidInput):
            run_classification_bench(
                {"blobs": blob_dataset(rng)},
                {"weighting": weighting_classifier()},
                runs=0,
            )

    def test_config_echo_reproduces_records(self):
        rng = np.random.default_rng(3)
        data = blob_dataset(rng)
        first = run_classification_bench(
            {"blobs": data}, {"weighting": weighting_classifier()}, runs=3, seed=5
        )
        again = run_classification_bench(
            {"blobs": data},
            {"weighting": weighting_classifier()},
            runs=first.config["runs"],
            seed=first.config["seed"],
            train_fraction=first.config["train_fraction"],
        )
        assert first.runs == again.runs

    def test_external_baselines_merge(self, tmp_path):
        rng = np.random.default_rng(4)
        data = blob_dataset(rng)
        path = tmp_path / "baselines.json"
        path.write_text(
            json.dumps([{"dataset": "blobs", "classifier": "knn", "accuracies": [0.9, 0.95]}])
        )
        baselines = load_baseline_accuracies(path)
        report = run_classification_bench(
            {"blobs": data},
            {"weighting": weighting_classifier()},
            runs=2,
            seed=0,
            baselines=baselines,
        )
        cell = report.aggregates["cells"]["blobs|knn"]
        assert cell["n"] == 2
        np.testing.assert_allclose(cell["mean"], 0.925)

    def test_report_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        report = run_classification_bench(
            {"blobs": blob_dataset(rng)},
            {"weighting": weighting_classifier()},
            runs=2,
            seed=1,
        )
        path = tmp_path / "report.json"
        report.save(path)
        loaded = ExperimentReport.load(path)
        assert loaded.runs == report.runs
        assert loaded.aggregates == report.aggregates


class TestNullClassBench:
    def test_far_held_out_class_goes_null(self):
        rng = np.random.default_rng(6)
        a = rng.normal(size=(20, 2))
        b = rng.normal(size=(20, 2)) + np.array([8.0, 0.0])
        held = rng.normal(size=(20, 2)) + np.array([500.0, 500.0])
        data = LabeledDataset(
            PointCloud(np.vstack([a, b, held])), np.repeat([0, 1, 2], 20)
        )
        confusion, report = run_null_class_bench(
            data, train_labels=(0, 1), held_out_label=2, threshold=1 - 1e-11, seed=0
        )
        held_row = confusion[0]
        assert held_row[0] == held_row.sum()  # all held-out points rejected
        assert report.aggregates["null_rate_held_out"] == 1.0

    def test_confusion_shape_and_totals(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(16, 2))
        b = rng.normal(size=(16, 2)) + 6.0
        c = rng.normal(size=(16, 2)) - 6.0
        data = LabeledDataset(
            PointCloud(np.vstack([a, b, c])), np.repeat([0, 1, 2], 16)
        )
        confusion, _ = run_null_class_bench(
            data, train_labels=(0, 1), held_out_label=2, train_fraction=0.75, seed=1
        )
        assert confusion.shape == (3, 3)
        assert confusion.sum() == 12  # 25% of 48 rows


class TestALBench:
    def test_mean_curves_recompute(self):
        rng = np.random.default_rng(8)
        data = blob_dataset(rng, n_per=30)
        report = run_al_bench(
            data, strategies=("random", "uncertainty"), budget=8, runs=3, seed=0
        )
        assert report.aggregates["mean_curves"] == mean_curves(report.runs)
        for curve in report.aggregates["mean_curves"].values():
            assert len(curve) == 3  # initial + budget/batch iterations

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        data = blob_dataset(rng, n_per=20)
        a = run_al_bench(data, strategies=("weighting",), budget=8, runs=2, seed=4)
        b = run_al_bench(data, strategies=("weighting",), budget=8, runs=2, seed=4)
        assert a.runs == b.runs
