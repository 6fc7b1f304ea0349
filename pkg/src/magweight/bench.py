"""Experiment orchestration: classification benchmarks, NULL-class runs,
active-learning curve averaging, and the incremental-update speed check.

Each entry point emits an ExperimentReport whose aggregates are derived
from its per-run records through the same helpers the tests use to audit
them.
"""

from __future__ import annotations

import json
import time

import numpy as np

from .active import DEFAULT_BATCH, DEFAULT_GAMMA, DEFAULT_LAMBDA, run_session
from .classify import LabeledDataset, fit
from .core import PointCloud, weighting
from .datasets import drop_class_duplicates, standardize, stratified_split
from .errors import InvalidInput
from .reports import ExperimentReport
from .schur import add_point


def weighting_classifier(scales=1.0, scale_mode="abs", null_threshold=None):
    """Benchmark adapter: train on a LabeledDataset, return a predict function."""

    def train(data: LabeledDataset):
        model = fit(data, scales=scales, scale_mode=scale_mode, null_threshold=null_threshold)
        return model.predict_batch

    return train


def accuracy_cells(runs) -> dict:
    """Per (dataset, classifier) mean/std accuracy, recomputed from records."""
    cells = {}
    for record in runs:
        key = f"{record['dataset']}|{record['classifier']}"
        cells.setdefault(key, []).append(record["accuracy"])
    return {
        key: {
            "mean": float(np.mean(accs)),
            "std": float(np.std(accs)),
            "n": len(accs),
        }
        for key, accs in cells.items()
    }


def run_classification_bench(
    datasets: dict,
    classifiers: dict,
    runs: int = 10,
    seed: int = 0,
    train_fraction: float = 0.7,
    standardize_features: bool = False,
    baselines: list | None = None,
) -> ExperimentReport:
    """Stratified-split accuracy benchmark over dataset x classifier cells.

    Each cell runs ``runs`` independent seeded 70/30 (by default) splits.
    Externally produced baseline records can be merged for side-by-side
    reporting; they are marked with ``source: external``.
    """
    if runs < 1:
        raise InvalidInput("runs must be >= 1")
    rng = np.random.default_rng(seed)
    split_seeds = rng.integers(0, 2**31 - 1, size=runs)
    records = []
    dropped = {}
    for ds_name, data in datasets.items():
        data, n_dropped = drop_class_duplicates(data)
        dropped[ds_name] = n_dropped
        if standardize_features:
            data = standardize(data)
        for clf_name, factory in classifiers.items():
            for r in range(runs):
                train, test = stratified_split(data, train_fraction, int(split_seeds[r]))
                predict = factory(train)
                predicted = predict(test.cloud.points)
                acc = float(np.mean(np.asarray(predicted) == test.labels))
                records.append(
                    {
                        "dataset": ds_name,
                        "classifier": clf_name,
                        "run": r,
                        "split_seed": int(split_seeds[r]),
                        "accuracy": acc,
                    }
                )
    if baselines:
        records.extend(dict(b, source="external") for b in baselines)
    report = ExperimentReport(
        experiment="classification-benchmark",
        dataset=",".join(datasets),
        config={
            "runs": runs,
            "seed": seed,
            "train_fraction": train_fraction,
            "standardize_features": standardize_features,
            "classifiers": sorted(classifiers),
            "dropped_duplicates": dropped,
        },
        runs=records,
    )
    report.aggregates = {"cells": accuracy_cells(records)}
    return report


def load_baseline_accuracies(path) -> list:
    """Read externally produced accuracy records for side-by-side reporting.

    Expected schema: a JSON list of objects with ``dataset``, ``classifier``
    and ``accuracies`` (list of floats).
    """
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, list):
        raise InvalidInput(f"{path}: expected a JSON list of baseline records")
    records = []
    for entry in doc:
        for r, acc in enumerate(entry["accuracies"]):
            records.append(
                {
                    "dataset": entry["dataset"],
                    "classifier": entry["classifier"],
                    "run": r,
                    "accuracy": float(acc),
                }
            )
    return records


def run_null_class_bench(
    data: LabeledDataset,
    train_labels: tuple,
    held_out_label: int,
    threshold: float = 1 - 1e-11,
    scales=1.0,
    train_fraction: float = 0.7,
    seed: int = 0,
):
    """Train on two classes, predict on those plus a held-out class.

    Returns (confusion, report): a 3x3 confusion matrix with true classes
    (held-out, first trained, second trained) as rows and predictions
    (NULL, first trained, second trained) as columns.
    """
    a, b = train_labels
    wanted = [held_out_label, a, b]
    mask = np.isin(data.labels, wanted)
    remap = {held_out_label: 2, a: 0, b: 1}
    sub_labels = np.array([remap[l] for l in data.labels[mask]], dtype=np.intp)
    names = tuple(
        str(data.label_names[l]) if data.label_names else str(l) for l in (a, b, held_out_label)
    )
    sub = LabeledDataset(
        data.cloud.subcloud(np.flatnonzero(mask)), sub_labels, label_names=names
    )
    train, test = stratified_split(sub, train_fraction, seed)

    train_mask = train.labels < 2
    train_two = LabeledDataset(
        train.cloud.subcloud(np.flatnonzero(train_mask)),
        train.labels[train_mask],
        label_names=names[:2],
    )
    model = fit(
        train_two, scales=scales, scale_mode="percentile", null_threshold=threshold
    )

    confusion = np.zeros((3, 3), dtype=int)
    row_of = {2: 0, 0: 1, 1: 2}  # held-out first, then the trained classes
    for x, true in zip(test.cloud.points, test.labels):
        predicted = model.predict(x)
        col = 0 if predicted is None else predicted + 1
        confusion[row_of[int(true)], col] += 1

    report = ExperimentReport(
        experiment="null-class-benchmark",
        dataset="+".join(names),
        config={
            "train_labels": [int(a), int(b)],
            "held_out_label": int(held_out_label),
            "threshold": threshold,
            "scales": np.broadcast_to(np.asarray(scales, float), (2,)).tolist(),
            "train_fraction": train_fraction,
            "seed": seed,
        },
        runs=[
            {
                "confusion": confusion.tolist(),
                "rows": ["held_out", "train_a", "train_b"],
                "columns": ["NULL", "train_a", "train_b"],
            }
        ],
    )
    report.aggregates = {
        "null_rate_held_out": float(confusion[0, 0] / max(confusion[0].sum(), 1)),
        "accuracy_train_a": float(confusion[1, 1] / max(confusion[1].sum(), 1)),
        "accuracy_train_b": float(confusion[2, 2] / max(confusion[2].sum(), 1)),
    }
    return confusion, report


def mean_curves(runs) -> dict:
    """Per-strategy mean accuracy curve, recomputed from per-run histories."""
    curves = {}
    for record in runs:
        curves.setdefault(record["strategy"], []).append(record["history"])
    out = {}
    for strategy, histories in curves.items():
        length = min(len(h) for h in histories)
        stacked = np.array([h[:length] for h in histories])
        out[strategy] = stacked.mean(axis=0).tolist()
    return out


def run_al_bench(
    data: LabeledDataset,
    strategies=("weighting", "uncertainty", "random"),
    budget: int = 40,
    runs: int = 20,
    seed: int = 0,
    gamma: float = DEFAULT_GAMMA,
    lam: float = DEFAULT_LAMBDA,
    train_fraction: float = 0.67,
    batch_size: int = DEFAULT_BATCH,
) -> ExperimentReport:
    """Averaged active-learning curves over seeded pool/test splits.

    Every strategy sees the same splits and the same per-run seeds, so the
    curves are directly comparable.
    """
    rng = np.random.default_rng(seed)
    run_seeds = rng.integers(0, 2**31 - 1, size=runs)
    records = []
    for r in range(runs):
        pool, test = stratified_split(data, train_fraction, int(run_seeds[r]))
        for strategy in strategies:
            session_report = run_session(
                pool,
                test,
                strategy=strategy,
                budget=budget,
                seed=int(run_seeds[r]),
                gamma=gamma,
                lam=lam,
                batch_size=batch_size,
            )
            records.append(
                {
                    "strategy": strategy,
                    "run": r,
                    "seed": int(run_seeds[r]),
                    "history": session_report.aggregates["history"],
                    "n_labeled": [rec["n_labeled"] for rec in session_report.runs],
                }
            )
    report = ExperimentReport(
        experiment="active-learning-benchmark",
        dataset="pool",
        config={
            "strategies": list(strategies),
            "budget": budget,
            "runs": runs,
            "seed": seed,
            "gamma": gamma,
            "lam": lam,
            "train_fraction": train_fraction,
            "batch_size": batch_size,
        },
        runs=records,
    )
    report.aggregates = {"mean_curves": mean_curves(records)}
    return report


def incremental_speedup(m: int = 2000, dim: int = 2, seed: int = 0) -> dict:
    """Wall-clock comparison: sequential add_point vs refactorizing each step.

    Builds an m-point weighting one insertion at a time, then repeats the
    construction by solving from scratch at every size.  Both paths produce
    the same weights; the returned record carries the timings and the final
    discrepancy.
    """
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(m, dim))
    cloud = PointCloud(pts)

    start = time.perf_counter()
    state = weighting(cloud.subcloud([0]))
    for i in range(1, m):
        state, _ = add_point(state, pts[i])
    incremental_seconds = time.perf_counter() - start

    start = time.perf_counter()
    for k in range(1, m + 1):
        full = weighting(cloud.subcloud(np.arange(k)))
    full_seconds = time.perf_counter() - start

    diff = float(np.abs(state.weights - full.weights).max())
    return {
        "m": m,
        "incremental_seconds": incremental_seconds,
        "full_seconds": full_seconds,
        "speedup": full_seconds / incremental_seconds,
        "max_weight_diff": diff,
    }
