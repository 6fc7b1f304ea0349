"""Dataset ingestion, synthetic generators, and stratified splits.

CSV is the only ingestion format: rectangular, numeric features, one header
row, and a designated label column.  Labels are mapped to dense ids in
sorted order of their original values, and the mapping is kept on the
dataset so reports can echo it.
"""

from __future__ import annotations

import csv

import numpy as np

from .classify import LabeledDataset
from .core import PointCloud
from .errors import InvalidInput


def _parse_cell(path, cell, row, column):
    text = cell.strip()
    if not text:
        raise InvalidInput(f"{path}: missing value at row {row}, column {column!r}")
    try:
        value = float(text)
    except ValueError:
        raise InvalidInput(
            f"{path}: non-numeric value {cell!r} at row {row}, column {column!r}"
        ) from None
    if not np.isfinite(value):
        raise InvalidInput(f"{path}: non-finite value {cell!r} at row {row}, column {column!r}")
    return value


def load_points_csv(path, metric: str = "L2", scale: float = 1.0) -> PointCloud:
    """Load an unlabeled point cloud: headered CSV, every column numeric."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInput(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise InvalidInput(f"{path}: no data rows")
    features = []
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise InvalidInput(
                f"{path}: row {r + 2} has {len(row)} cells, expected {len(header)}"
            )
        features.append([_parse_cell(path, cell, r + 2, header[c]) for c, cell in enumerate(row)])
    return PointCloud(np.asarray(features, dtype=np.float64), metric=metric, scale=scale)


def load_csv(path, label_column, metric: str = "L2", scale: float = 1.0) -> LabeledDataset:
    """Load a labeled dataset from a headered numeric CSV.

    Parameters
    ----------
    path : str or Path
        CSV file with a header row and rectangular numeric body.
    label_column : str or int
        Header name or 0-based column index of the label column.  Label
        values may be arbitrary strings; they are mapped to dense ids in
        sorted order and the original names are recorded.

    Raises
    ------
    InvalidInput
        For a missing/ragged/empty file, a non-numeric or missing feature
        value (the error names the row and column), or an unknown label
        column.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInput(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise InvalidInput(f"{path}: no data rows")

    if isinstance(label_column, int):
        label_idx = label_column
        if not 0 <= label_idx < len(header):
            raise InvalidInput(f"{path}: label column index {label_idx} out of range")
    else:
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise InvalidInput(
                f"{path}: no column named {label_column!r} in header {header}"
            ) from None

    features = []
    raw_labels = []
    n_cols = len(header)
    for r, row in enumerate(rows):
        if len(row) != n_cols:
            raise InvalidInput(f"{path}: row {r + 2} has {len(row)} cells, expected {n_cols}")
        vals = []
        for c, cell in enumerate(row):
            if c == label_idx:
                raw_labels.append(cell.strip())
                continue
            vals.append(_parse_cell(path, cell, r + 2, header[c]))
        features.append(vals)

    names = sorted(set(raw_labels))
    mapping = {name: i for i, name in enumerate(names)}
    labels = np.array([mapping[l] for l in raw_labels], dtype=np.intp)
    cloud = PointCloud(np.asarray(features, dtype=np.float64), metric=metric, scale=scale)
    return LabeledDataset(cloud, labels, label_names=tuple(names))


def save_csv(data: LabeledDataset, path, feature_names=None, label_name: str = "label"):
    """Write a LabeledDataset back to the CSV layout load_csv understands."""
    n = data.cloud.dim
    if feature_names is None:
        feature_names = [f"x{i}" for i in range(n)]
    names = data.label_names or tuple(str(i) for i in range(data.n_classes))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(feature_names) + [label_name])
        for row, label in zip(data.cloud.points, data.labels):
            writer.writerow([repr(float(v)) for v in row] + [names[label]])


def _allocate_counts(counts: np.ndarray, fraction: float) -> np.ndarray:
    """Largest-remainder allocation of per-class train counts.

    The total train size is round(fraction * m); each class receives the
    floor of its exact share, and leftover points go to the classes with
    the largest fractional remainders (ties to the lowest class id).  Every
    class keeps at least one point on each side of the split.
    """
    m = counts.sum()
    total = int(round(fraction * m))
    exact = fraction * counts
    base = np.floor(exact).astype(int)
    base = np.clip(base, 1, counts - 1)
    remaining = total - base.sum()
    order = np.lexsort((np.arange(counts.size), -(exact - np.floor(exact))))
    i = 0
    while remaining > 0 and i < order.size:
        c = order[i]
        if base[c] < counts[c] - 1:
            base[c] += 1
            remaining -= 1
        i += 1
    while remaining < 0 and i < order.size:
        c = order[::-1][i]
        if base[c] > 1:
            base[c] -= 1
            remaining += 1
        i += 1
    return base


def stratified_split(data: LabeledDataset, train_fraction: float, seed: int):
    """Seeded stratified split preserving class proportions within one point.

    Returns (train, test) LabeledDatasets.  Every class must have at least
    two points so both sides stay nonempty.
    """
    if not 0.0 < train_fraction < 1.0:
        raise InvalidInput(f"train fraction must lie in (0, 1), got {train_fraction}")
    counts = np.bincount(data.labels, minlength=data.n_classes)
    if (counts < 2).any():
        small = int(np.argmin(counts))
        raise InvalidInput(f"class {small} has fewer than 2 points; cannot split")

    rng = np.random.default_rng(seed)
    takes = _allocate_counts(counts, train_fraction)
    train_idx, test_idx = [], []
    for label in range(data.n_classes):
        idx = rng.permutation(np.flatnonzero(data.labels == label))
        train_idx.append(idx[: takes[label]])
        test_idx.append(idx[takes[label] :])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return data.subset(train_idx), data.subset(test_idx)


def gen_checkerboard(
    cells_per_side: int,
    n_points: int,
    noise: float = 0.0,
    seed: int = 0,
) -> LabeledDataset:
    """Uniform points in the unit square labeled by cell parity.

    ``noise`` is the probability of flipping a label, applied pointwise
    with the same seeded generator.
    """
    if cells_per_side < 1:
        raise InvalidInput("cells_per_side must be >= 1")
    if not 0.0 <= noise <= 1.0:
        raise InvalidInput("noise must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n_points, 2))
    cells = np.minimum((pts * cells_per_side).astype(int), cells_per_side - 1)
    labels = (cells[:, 0] + cells[:, 1]) % 2
    if noise:
        flips = rng.uniform(size=n_points) < noise
        labels = np.where(flips, 1 - labels, labels)
    return LabeledDataset(PointCloud(pts), labels, label_names=("even", "odd"))


def gen_outlier_mixture(
    cluster_specs,
    n_background: int,
    bounds,
    seed: int = 0,
) -> LabeledDataset:
    """Gaussian inlier clusters plus uniform background outliers.

    ``cluster_specs`` is a sequence of (mean, std, count) triples; the
    background points are uniform over ``bounds = (low, high)`` per
    coordinate.  Ground truth is the label: 0 = inlier, 1 = outlier.
    """
    rng = np.random.default_rng(seed)
    blocks, labels = [], []
    dim = None
    for mean, std, count in cluster_specs:
        mean = np.asarray(mean, dtype=np.float64)
        dim = mean.size if dim is None else dim
        blocks.append(rng.normal(loc=mean, scale=std, size=(count, mean.size)))
        labels.append(np.zeros(count, dtype=np.intp))
    if dim is None:
        raise InvalidInput("at least one cluster spec is required")
    low, high = bounds
    if n_background:
        blocks.append(rng.uniform(low, high, size=(n_background, dim)))
        labels.append(np.ones(n_background, dtype=np.intp))
    cloud = PointCloud(np.vstack(blocks))
    return LabeledDataset(
        cloud, np.concatenate(labels), label_names=("inlier", "outlier")
    )


def drop_class_duplicates(data: LabeledDataset):
    """Remove rows that duplicate an earlier same-label row exactly.

    Within-class coordinate duplicates make a class's similarity matrix
    singular, so benchmark harnesses drop them up front (iris ships one).
    Returns (cleaned dataset, number of rows dropped).
    """
    seen = set()
    keep = []
    for i, (row, label) in enumerate(zip(data.cloud.points, data.labels)):
        key = (int(label), row.tobytes())
        if key in seen:
            continue
        seen.add(key)
        keep.append(i)
    if len(keep) == len(data):
        return data, 0
    return data.subset(np.asarray(keep, dtype=np.intp)), len(data) - len(keep)


def standardize(data: LabeledDataset) -> LabeledDataset:
    """Per-feature zero-mean unit-variance rescaling (optional, off by default)."""
    pts = data.cloud.points
    mu = pts.mean(axis=0)
    sigma = pts.std(axis=0)
    sigma[sigma == 0.0] = 1.0
    cloud = PointCloud((pts - mu) / sigma, data.cloud.metric, data.cloud.scale)
    return LabeledDataset(cloud, data.labels, data.label_names)
