"""Point clouds, similarity matrices, and weighting-vector computation.

The weighting vector of a finite point set is the solution ``w`` of
``zeta w = 1`` where ``zeta[i, j] = exp(-t * d(x_i, x_j))``.  Its sum is the
magnitude of the set; individual entries concentrate near the boundary of
the set, which is what the higher-level modules exploit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import blas, lapack
from scipy.spatial.distance import cdist

from .errors import DegenerateInput, IllConditioned, InvalidInput

METRICS = ("L2", "L1")
_CDIST_NAME = {"L2": "euclidean", "L1": "cityblock"}

# Residual acceptance for a returned solve: ||zeta w - 1||_inf <= RESIDUAL_TOL * m.
RESIDUAL_TOL = 1e-8


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise InvalidInput(f"points must be a (m, n) array with m >= 1, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        bad = np.argwhere(~np.isfinite(pts))[0]
        raise InvalidInput(f"non-finite coordinate at point {bad[0]}, dimension {bad[1]}")
    return pts


@dataclass(frozen=True)
class PointCloud:
    """An ordered finite set of points with a metric choice and scale factor.

    Parameters
    ----------
    points : array_like, shape (m, n)
        Row-major coordinates.  A 1-d array is treated as m points in R^1.
    metric : {"L2", "L1"}
        Ground metric; effective distances are ``scale * d(x_i, x_j)``.
    scale : float
        Positive scale factor t.  Stored separately from the coordinates so
        that sweeping t can reuse one distance matrix.
    """

    points: np.ndarray
    metric: str = "L2"
    scale: float = 1.0

    def __post_init__(self):
        pts = _as_points(self.points)
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.metric not in METRICS:
            raise InvalidInput(f"metric must be one of {METRICS}, got {self.metric!r}")
        t = float(self.scale)
        if not np.isfinite(t) or t <= 0:
            raise InvalidInput(f"scale must be a positive finite real, got {t}")
        object.__setattr__(self, "scale", t)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def with_scale(self, scale: float) -> "PointCloud":
        return PointCloud(self.points, self.metric, scale)

    def subcloud(self, indices) -> "PointCloud":
        idx = np.asarray(indices, dtype=np.intp)
        return PointCloud(self.points[idx], self.metric, self.scale)

    def append(self, point) -> "PointCloud":
        x = np.atleast_2d(np.asarray(point, dtype=np.float64))
        return PointCloud(np.vstack([self.points, x]), self.metric, self.scale)

    def has_duplicates(self) -> bool:
        return np.unique(self.points, axis=0).shape[0] < len(self)


@dataclass(frozen=True)
class SimilarityMatrix:
    """Entrywise ``exp(-t d(x_i, x_j))`` of a point cloud's distance matrix."""

    entries: np.ndarray
    source: PointCloud


def distance_matrix(cloud: PointCloud) -> np.ndarray:
    """Pairwise scaled distances ``t * d(x_i, x_j)``; zero diagonal, symmetric."""
    d = cdist(cloud.points, cloud.points, metric=_CDIST_NAME[cloud.metric])
    np.fill_diagonal(d, 0.0)
    return cloud.scale * d


def cross_distances(cloud: PointCloud, rows, cols) -> np.ndarray:
    """Scaled distances between two index subsets of one cloud."""
    r = np.asarray(rows, dtype=np.intp)
    c = np.asarray(cols, dtype=np.intp)
    return cloud.scale * cdist(
        cloud.points[r], cloud.points[c], metric=_CDIST_NAME[cloud.metric]
    )


def point_similarity(cloud: PointCloud, x) -> np.ndarray:
    """Similarity column ``exp(-t d(x_i, x))`` of an external point against the cloud."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape != (1, cloud.dim):
        raise InvalidInput(f"expected a single point of dimension {cloud.dim}, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise InvalidInput("non-finite coordinate in query point")
    d = cdist(cloud.points, x, metric=_CDIST_NAME[cloud.metric])[:, 0]
    return np.exp(-cloud.scale * d)


def similarity_matrix(cloud: PointCloud) -> SimilarityMatrix:
    """Similarity matrix of a cloud; entries in (0, 1], unit diagonal."""
    z = np.exp(-distance_matrix(cloud))
    np.fill_diagonal(z, 1.0)
    return SimilarityMatrix(entries=z, source=cloud)


def _cholesky_spd(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix, IllConditioned on breakdown."""
    c, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise IllConditioned(
            f"matrix not positive definite at working precision (pivot {info - 1})",
            pivot=info - 1,
        )
    if info < 0:
        raise InvalidInput(f"illegal value in argument {-info} of dpotrf")
    return c


def _chol_solve(chol: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    x, info = lapack.dpotrs(chol, rhs, lower=1)
    if info != 0:
        raise IllConditioned("triangular solve failed", pivot=None)
    return x


def _tri(n: int) -> int:
    return n * (n + 1) // 2


class PackedFactor:
    """Lower-triangular factor stored as concatenated rows of a 1-d buffer.

    Appending a row writes in place at the tail when this factor is still
    the tip of its buffer (single-writer lineage); a fork or a full buffer
    copies the prefix into a geometrically grown buffer instead.  Row slices
    coincide with LAPACK's packed-upper layout of the transpose, so BLAS
    ``tpsv`` solves against the buffer directly, copy-free.
    """

    __slots__ = ("buf", "rows")

    def __init__(self, buf: np.ndarray, rows: int):
        self.buf = buf
        self.rows = rows

    @classmethod
    def from_dense(cls, chol: np.ndarray) -> "PackedFactor":
        m = chol.shape[0]
        buf = np.empty(_tri(m))
        for i in range(m):
            buf[_tri(i) : _tri(i + 1)] = chol[i, : i + 1]
        return cls(buf, m)

    def packed(self, m: int) -> np.ndarray:
        return self.buf[: _tri(m)]

    def dense(self, m: int) -> np.ndarray:
        out = np.zeros((m, m))
        for i in range(m):
            out[i, : i + 1] = self.buf[_tri(i) : _tri(i + 1)]
        return out

    def append_row(self, m: int, row: np.ndarray) -> "PackedFactor":
        need = _tri(m + 1)
        if self.rows == m and self.buf.size >= need:
            self.buf[_tri(m) : need] = row
            self.rows = m + 1
            return self
        buf = np.empty(max(2 * need, 64))
        buf[: _tri(m)] = self.buf[: _tri(m)]
        buf[_tri(m) : need] = row
        return PackedFactor(buf, m + 1)

    def solve_lower(self, m: int, rhs: np.ndarray) -> np.ndarray:
        """x with L x = rhs."""
        return blas.dtpsv(m, self.packed(m), rhs, lower=0, trans=1)

    def solve_upper(self, m: int, rhs: np.ndarray) -> np.ndarray:
        """x with L^T x = rhs."""
        return blas.dtpsv(m, self.packed(m), rhs, lower=0, trans=0)


@dataclass(frozen=True)
class WeightingState:
    """A cloud together with its retained factorization, weights, and magnitude.

    ``factor`` holds the lower Cholesky factor of ``zeta[order][:, order]``;
    the permutation ``order`` lets incrementally built states keep their
    factor without re-factorizing, and ``chol`` materializes it densely on
    demand.  ``weights`` stays aligned with ``cloud.points``.  Logically
    immutable; one incremental insertion lineage is a single-writer process.
    """

    cloud: PointCloud
    weights: np.ndarray
    magnitude: float
    factor: PackedFactor
    order: np.ndarray
    jitter: float = 0.0

    def __post_init__(self):
        for name in ("weights", "order"):
            arr = getattr(self, name)
            if arr.flags.writeable:
                arr = arr.copy()
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.cloud)

    @property
    def chol(self) -> np.ndarray:
        """Dense lower-triangular factor (materialized once, then cached)."""
        cached = self.__dict__.get("_dense_chol")
        if cached is None:
            cached = self.factor.dense(len(self))
            cached.flags.writeable = False
            object.__setattr__(self, "_dense_chol", cached)
        return cached

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Return ``zeta^{-1} rhs`` (natural point order) using the retained factor."""
        rhs = np.asarray(rhs, dtype=np.float64)
        out = np.empty_like(rhs)
        out[self.order] = _chol_solve(self.chol, rhs[self.order])
        return out

    def half_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Return ``L^{-1} P rhs``, the forward-substitution half of a solve."""
        rhs = np.asarray(rhs, dtype=np.float64)
        return self.factor.solve_lower(len(self), rhs[self.order])


def _weights_from_similarity(zeta: np.ndarray, jitter: float = 0.0):
    """Solve ``zeta w = 1`` by Cholesky; returns (weights, factor)."""
    m = zeta.shape[0]
    if jitter:
        zeta = zeta + jitter * np.eye(m)
    chol = _cholesky_spd(zeta)
    w = _chol_solve(chol, np.ones(m))
    residual = np.abs(zeta @ w - 1.0).max()
    if residual > RESIDUAL_TOL * m:
        raise IllConditioned(
            f"solve residual {residual:.3e} exceeds {RESIDUAL_TOL * m:.3e}", pivot=None
        )
    return w, chol


def weighting(cloud: PointCloud, jitter: float = 0.0) -> WeightingState:
    """Compute the weighting vector and magnitude of a cloud.

    Solves ``zeta w = 1`` through a symmetric positive definite factorization
    (the inverse is never formed) and retains the factor for incremental
    reuse.

    Parameters
    ----------
    cloud : PointCloud
        Pairwise-distinct points; duplicates raise DegenerateInput.
    jitter : float
        Optional diagonal shift for exploratory use, default 0.  A nonzero
        value perturbs the similarity matrix and is recorded on the result.

    Raises
    ------
    DegenerateInput
        If two points coincide exactly.
    IllConditioned
        If the factorization breaks down at working precision, e.g. at an
        extremely small scale; carries the failing pivot index.
    """
    if cloud.has_duplicates():
        raise DegenerateInput("duplicate points make the similarity matrix singular")
    zeta = similarity_matrix(cloud).entries
    w, chol = _weights_from_similarity(zeta, jitter=jitter)
    w.flags.writeable = False
    state = WeightingState(
        cloud=cloud,
        weights=w,
        magnitude=float(w.sum()),
        factor=PackedFactor.from_dense(chol),
        order=np.arange(len(cloud)),
        jitter=float(jitter),
    )
    chol.flags.writeable = False
    object.__setattr__(state, "_dense_chol", chol)  # already in hand; cache it
    return state


@dataclass(frozen=True)
class MagnitudeSweep:
    """Magnitudes of ``t X`` over a scale grid; failed scales become NaN gaps."""

    scales: np.ndarray
    magnitudes: np.ndarray
    failures: tuple = field(default_factory=tuple)

    def __iter__(self):
        return iter(zip(self.scales, self.magnitudes))


def magnitude_function(cloud: PointCloud, scales) -> MagnitudeSweep:
    """Evaluate ``t -> Mag(tX)`` over an ascending grid of positive scales.

    Ill-conditioned scales are recorded as NaN gaps together with the error
    message instead of being dropped.  The distance matrix is computed once
    and shared across the sweep.
    """
    ts = np.asarray(scales, dtype=np.float64)
    if ts.ndim != 1 or ts.size == 0:
        raise InvalidInput("scales must be a nonempty 1-d sequence")
    if not np.isfinite(ts).all() or (ts <= 0).any():
        raise InvalidInput("scales must be strictly positive finite reals")
    if (np.diff(ts) <= 0).any():
        raise InvalidInput("scales must be sorted strictly ascending")
    if cloud.has_duplicates():
        raise DegenerateInput("duplicate points make the similarity matrix singular")

    base = distance_matrix(cloud) / cloud.scale
    mags = np.full(ts.shape, np.nan)
    failures = []
    for i, t in enumerate(ts):
        zeta = np.exp(-t * base)
        np.fill_diagonal(zeta, 1.0)
        try:
            w, _ = _weights_from_similarity(zeta)
        except IllConditioned as err:
            failures.append((float(t), str(err)))
            continue
        mags[i] = w.sum()
    return MagnitudeSweep(scales=ts, magnitudes=mags, failures=tuple(failures))
