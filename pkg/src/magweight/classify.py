"""Classification by per-class weighting vectors.

A fitted model caches one weighting state per class.  Scoring a new point
inserts it into each class's point set by a rank-1 update against the cached
factorization, so a single prediction costs O(|class|^2) instead of a fresh
O(|class|^3) solve.  A low inserted weight marks the point as interior to
that class; the class with the minimum scaled weight wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import PointCloud, WeightingState, point_similarity, weighting
from .errors import IllConditioned, InvalidInput

SCALE_MODES = ("abs", "percentile")


@dataclass(frozen=True)
class LabeledDataset:
    """A point cloud plus dense integer labels 0..k-1."""

    cloud: PointCloud
    labels: np.ndarray
    label_names: tuple | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.intp)
        if labels.ndim != 1 or labels.shape[0] != len(self.cloud):
            raise InvalidInput(
                f"labels must be a length-{len(self.cloud)} vector, got shape {labels.shape}"
            )
        if labels.size and labels.min() < 0:
            raise InvalidInput("labels must be nonnegative ids")
        labels = labels.copy()
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        if self.label_names is not None:
            object.__setattr__(self, "label_names", tuple(self.label_names))

    def __len__(self):
        return len(self.cloud)

    @property
    def n_classes(self) -> int:
        if self.label_names is not None:
            return len(self.label_names)
        return int(self.labels.max()) + 1

    def class_indices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.intp)
        return LabeledDataset(self.cloud.subcloud(idx), self.labels[idx], self.label_names)


def _new_point_weight(state: WeightingState, x) -> float:
    """Weight of an external point inserted into a cached weighting.

    The rank-1 insertion of add_point, restricted to the new coordinate:
    one triangular solve against the retained factor.
    """
    b = point_similarity(state.cloud, x)
    c = state.half_solve(b)
    delta = 1.0 - c @ c
    if delta <= 0.0:
        raise IllConditioned(
            f"nonpositive scalar Schur complement {delta:.3e}", pivot=len(state.cloud)
        )
    return float((1.0 - b @ state.weights) / delta)


@dataclass(frozen=True)
class FittedClassifier:
    """Per-class weighting states with their scales and scoring configuration."""

    states: tuple
    scales: np.ndarray
    scale_mode: str
    null_threshold: float | None
    label_names: tuple | None
    _sorted_weights: tuple

    @property
    def n_classes(self) -> int:
        return len(self.states)

    def score(self, x) -> np.ndarray:
        """Scaled inserted weight of ``x`` against every class."""
        scores = np.empty(self.n_classes)
        for i, state in enumerate(self.states):
            dup = np.flatnonzero((state.cloud.points == np.asarray(x, float)).all(axis=1))
            if dup.size:
                w_new = float(state.weights[dup[0]])
            else:
                w_new = _new_point_weight(state, x)
            if self.scale_mode == "abs":
                scores[i] = abs(w_new)
            else:
                ranked = self._sorted_weights[i]
                count = np.searchsorted(ranked, w_new, side="right")
                scores[i] = max(count, 1) / ranked.size
        return scores

    def predict(self, x):
        """Label id with the minimum scaled weight, or None for the NULL class."""
        scores = self.score(x)
        if self.null_threshold is not None and (scores > self.null_threshold).all():
            return None
        return int(np.argmin(scores))

    def predict_batch(self, points) -> list:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return [self.predict(p) for p in pts]


def fit(
    data: LabeledDataset,
    scales=1.0,
    scale_mode: str = "abs",
    null_threshold: float | None = None,
) -> FittedClassifier:
    """Fit the weighting classifier: one cached weighting state per class.

    Parameters
    ----------
    data : LabeledDataset
        Training points; every class must be nonempty and duplicate-free
        within itself.
    scales : float or sequence
        Shared scale t, or one t_i per class.
    scale_mode : {"abs", "percentile"}
        How an inserted weight is normalized against the class: absolute
        value, or its rank among the cached training weights.
    null_threshold : float, optional
        When set (requires percentile mode), predictions whose every scaled
        score exceeds the threshold are rejected as NULL.
    """
    if scale_mode not in SCALE_MODES:
        raise InvalidInput(f"scale_mode must be one of {SCALE_MODES}, got {scale_mode!r}")
    if null_threshold is not None:
        if scale_mode != "percentile":
            raise InvalidInput("null_threshold semantics are percentile-based")
        if not 0.0 < null_threshold <= 1.0:
            raise InvalidInput(f"null_threshold must lie in (0, 1], got {null_threshold}")

    k = data.n_classes
    ts = np.broadcast_to(np.asarray(scales, dtype=np.float64), (k,)).copy()
    if (ts <= 0).any() or not np.isfinite(ts).all():
        raise InvalidInput("scales must be positive finite reals")

    states = []
    for i in range(k):
        idx = data.class_indices(i)
        if idx.size == 0:
            raise InvalidInput(f"class {i} has no training points")
        sub = data.cloud.subcloud(idx).with_scale(ts[i])
        try:
            states.append(weighting(sub))
        except IllConditioned as err:
            raise IllConditioned(f"class {i}: {err}", pivot=err.pivot) from err
    ranked = tuple(np.sort(s.weights) for s in states)
    return FittedClassifier(
        states=tuple(states),
        scales=ts,
        scale_mode=scale_mode,
        null_threshold=null_threshold,
        label_names=data.label_names,
        _sorted_weights=ranked,
    )


def _stratified_folds(labels: np.ndarray, folds: int, rng) -> list:
    assignment = np.empty(labels.shape[0], dtype=np.intp)
    for label in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == label))
        assignment[idx] = np.arange(idx.size) % folds
    return [np.flatnonzero(assignment == f) for f in range(folds)]


def _cv_accuracy(data: LabeledDataset, folds_idx, ts, scale_mode) -> float:
    scores = []
    for test_idx in folds_idx:
        mask = np.ones(len(data), dtype=bool)
        mask[test_idx] = False
        model = fit(data.subset(np.flatnonzero(mask)), scales=ts, scale_mode=scale_mode)
        predicted = model.predict_batch(data.cloud.points[test_idx])
        scores.append(np.mean(np.asarray(predicted) == data.labels[test_idx]))
    return float(np.mean(scores))


def tune_scales(
    data: LabeledDataset,
    grid,
    folds: int,
    seed: int = 0,
    scale_mode: str = "abs",
) -> np.ndarray:
    """Grid-search per-class scales by stratified cross-validation.

    A shared scale is selected first; a single coordinate pass then refines
    each class's t_i with the others held fixed.  Ties always go to the
    smallest t, and the fold split is deterministic given the seed.
    """
    grid = np.sort(np.asarray(grid, dtype=np.float64))
    if grid.size == 0:
        raise InvalidInput("grid must be nonempty")
    if (grid <= 0).any() or not np.isfinite(grid).all():
        raise InvalidInput("grid values must be positive finite reals")
    if folds < 2:
        raise InvalidInput(f"folds must be >= 2, got {folds}")
    counts = np.bincount(data.labels, minlength=data.n_classes)
    if (counts < 2).any():
        raise InvalidInput("every class needs >= 2 points for cross-validation")

    rng = np.random.default_rng(seed)
    folds_idx = _stratified_folds(data.labels, folds, rng)
    k = data.n_classes

    if grid.size == 1:
        return np.full(k, grid[0])

    best_t, best_acc = grid[0], -1.0
    for t in grid:
        acc = _cv_accuracy(data, folds_idx, np.full(k, t), scale_mode)
        if acc > best_acc:
            best_t, best_acc = t, acc
    ts = np.full(k, best_t)

    for i in range(k):
        best_ti, best_acc = ts[i], _cv_accuracy(data, folds_idx, ts, scale_mode)
        for t in grid:
            if t == ts[i]:
                continue
            trial = ts.copy()
            trial[i] = t
            acc = _cv_accuracy(data, folds_idx, trial, scale_mode)
            if acc > best_acc or (acc == best_acc and t < best_ti):
                best_ti, best_acc = t, acc
        ts[i] = best_ti
    return ts


FORMAT_NAME = "magweight-classifier"
FORMAT_VERSION = 1


def save_classifier(model: FittedClassifier, path):
    """Dump a fitted model to versioned JSON; factorizations are not stored."""
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "metric": model.states[0].cloud.metric,
        "scale_mode": model.scale_mode,
        "null_threshold": model.null_threshold,
        "label_names": list(model.label_names) if model.label_names else None,
        "classes": [
            {
                "scale": float(t),
                "points": state.cloud.points.tolist(),
                "weights": state.weights.tolist(),
            }
            for state, t in zip(model.states, model.scales)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_classifier(path) -> FittedClassifier:
    """Rebuild a fitted model from JSON, recomputing each factorization."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT_NAME:
        raise InvalidInput(f"not a {FORMAT_NAME} file: {path}")
    if doc.get("version") != FORMAT_VERSION:
        raise InvalidInput(f"unsupported model version {doc.get('version')}")
    states, ranked, ts = [], [], []
    for i, cls in enumerate(doc["classes"]):
        cloud = PointCloud(np.array(cls["points"]), doc["metric"], cls["scale"])
        state = weighting(cloud)
        stored = np.asarray(cls["weights"])
        if not np.allclose(state.weights, stored, rtol=1e-8, atol=1e-8):
            raise InvalidInput(f"stored weights of class {i} do not match recomputation")
        states.append(state)
        ranked.append(np.sort(state.weights))
        ts.append(cls["scale"])
    names = doc.get("label_names")
    return FittedClassifier(
        states=tuple(states),
        scales=np.asarray(ts),
        scale_mode=doc["scale_mode"],
        null_threshold=doc["null_threshold"],
        label_names=tuple(names) if names else None,
        _sorted_weights=tuple(ranked),
    )
