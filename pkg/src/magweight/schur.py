"""Block-matrix machinery for growing and merging weighting vectors.

Everything here avoids refactorizing the full similarity matrix: extending a
weighting from a subset to a superset only factorizes the Schur complement
of the known block, and adding one point costs a handful of matrix-vector
products against the retained factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .core import (
    PackedFactor,
    PointCloud,
    WeightingState,
    _cholesky_spd,
    _chol_solve,
    cross_distances,
    point_similarity,
    weighting,
)
from .errors import DegenerateInput, IllConditioned, InvalidInput


@dataclass(frozen=True)
class BlockPartition:
    """An ordered split of ``{0..m-1}`` into a subset and its complement.

    Induces the permutation that puts the similarity matrix into block form:
    subset rows first, complement rows last.
    """

    subset: np.ndarray
    complement: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.subset, dtype=np.intp)
        c = np.asarray(self.complement, dtype=np.intp)
        object.__setattr__(self, "subset", s)
        object.__setattr__(self, "complement", c)
        for name, idx in (("subset", s), ("complement", c)):
            if idx.size and (np.diff(idx) <= 0).any():
                raise InvalidInput(f"{name} indices must be sorted strictly ascending")
        m = s.size + c.size
        union = np.zeros(m, dtype=bool)
        for idx in (s, c):
            if idx.size and (idx.min() < 0 or idx.max() >= m):
                raise InvalidInput("partition indices out of range")
            union[idx] = True
        if not union.all() or np.intersect1d(s, c).size:
            raise InvalidInput("subset and complement must partition {0..m-1}")

    @classmethod
    def from_subset(cls, m: int, subset) -> "BlockPartition":
        s = np.asarray(subset, dtype=np.intp)
        mask = np.zeros(m, dtype=bool)
        mask[s] = True
        return cls(np.sort(s), np.flatnonzero(~mask))

    @property
    def size(self) -> int:
        return self.subset.size + self.complement.size

    @property
    def perm(self) -> np.ndarray:
        """Permuted-to-natural index map: subset first, complement last."""
        return np.concatenate([self.subset, self.complement])


@dataclass(frozen=True)
class RhoMatrix:
    """Correction term relating a padded block inverse to the full inverse.

    Stored in permuted block coordinates (subset rows first).  Satisfies
    ``inv(zeta[perm][:, perm]) = [[inv(zeta_sub), 0], [0, 0]] + matrix``.
    """

    matrix: np.ndarray
    partition: BlockPartition


def schur_complement(matrix: np.ndarray, head: int, corner: str = "A") -> np.ndarray:
    """Schur complement of one corner block of a 2x2-partitioned matrix.

    Parameters
    ----------
    matrix : ndarray, shape (m, m)
        The full matrix ``[[A, B], [C, D]]`` with ``A`` of size head x head.
    head : int
        Number of leading rows/columns forming the A block.
    corner : {"A", "D"}
        Which corner to eliminate: ``"A"`` returns ``D - C A^-1 B``,
        ``"D"`` returns ``A - B D^-1 C``.  The designated corner must be
        SPD at working precision.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"matrix must be square, got shape {m.shape}")
    if not 0 <= head <= m.shape[0]:
        raise InvalidInput(f"head block size {head} out of range for {m.shape[0]}x{m.shape[0]}")
    a, b = m[:head, :head], m[:head, head:]
    c, d = m[head:, :head], m[head:, head:]
    if corner == "A":
        if head == 0:
            return d.copy()
        chol = _cholesky_spd(a)
        return d - c @ _chol_solve(chol, b)
    if corner == "D":
        if head == m.shape[0]:
            return a.copy()
        chol = _cholesky_spd(d)
        return a - b @ _chol_solve(chol, c)
    raise InvalidInput(f"corner must be 'A' or 'D', got {corner!r}")


def _check_subset_state(state: WeightingState, full_cloud: PointCloud, part: BlockPartition):
    if part.size != len(full_cloud):
        raise InvalidInput(
            f"partition covers {part.size} indices but cloud has {len(full_cloud)} points"
        )
    if state is None:
        if part.subset.size:
            raise InvalidInput("a weighting state is required for a nonempty subset")
        return
    if state.jitter:
        raise InvalidInput("block updates require an unjittered weighting state")
    sub = state.cloud
    if sub.metric != full_cloud.metric or sub.scale != full_cloud.scale:
        raise InvalidInput("subset state and full cloud disagree on metric or scale")
    if len(sub) != part.subset.size or not np.array_equal(
        sub.points, full_cloud.points[part.subset]
    ):
        raise InvalidInput("weighting state was not built from the subset rows of the cloud")


def _cross_block(full_cloud: PointCloud, rows, cols) -> np.ndarray:
    return np.exp(-cross_distances(full_cloud, rows, cols))


def rho(
    weights_sub: WeightingState | None,
    full_cloud: PointCloud,
    part: BlockPartition,
) -> RhoMatrix:
    """Materialize the dense correction matrix for a subset of a cloud.

    Zero when the subset is everything; the full similarity matrix when the
    subset is empty.  Prefer :func:`extend_weighting` / :func:`add_point`
    when only the action of the matrix on the all-ones vector is needed.
    """
    _check_subset_state(weights_sub, full_cloud, part)
    m = len(full_cloud)
    if part.complement.size == 0:
        return RhoMatrix(matrix=np.zeros((m, m)), partition=part)
    if part.subset.size == 0:
        perm = part.perm
        zeta = _cross_block(full_cloud, perm, perm)
        np.fill_diagonal(zeta, 1.0)
        return RhoMatrix(matrix=zeta, partition=part)

    ns = part.subset.size
    b = _cross_block(full_cloud, part.subset, part.complement)
    d = _cross_block(full_cloud, part.complement, part.complement)
    np.fill_diagonal(d, 1.0)
    e = weights_sub.solve(b)
    s = d - b.T @ e
    s_chol = _cholesky_spd(s)
    s_inv = _chol_solve(s_chol, np.eye(part.complement.size))
    f = e @ s_inv
    out = np.empty((m, m))
    out[:ns, :ns] = f @ e.T
    out[:ns, ns:] = -f
    out[ns:, :ns] = -f.T
    out[ns:, ns:] = s_inv
    return RhoMatrix(matrix=out, partition=part)


def extend_weighting(
    weights_sub: WeightingState | None,
    full_cloud: PointCloud,
    part: BlockPartition,
) -> WeightingState:
    """Grow a subset weighting to the full cloud without refactorizing it.

    Only the Schur complement of the known block (size = number of new
    points) is factorized; the subset's retained factor is reused both for
    the solve and as the leading block of the result's factor.
    """
    _check_subset_state(weights_sub, full_cloud, part)
    if part.subset.size == 0:
        return weighting(full_cloud)
    if part.complement.size == 0:
        return weights_sub
    if full_cloud.has_duplicates():
        raise DegenerateInput("duplicate points make the similarity matrix singular")

    b = _cross_block(full_cloud, part.subset, part.complement)
    d = _cross_block(full_cloud, part.complement, part.complement)
    np.fill_diagonal(d, 1.0)

    g = solve_triangular(weights_sub.chol, b[weights_sub.order], lower=True, check_finite=False)
    s = d - g.T @ g
    s_chol = _cholesky_spd(s)

    w_sub = weights_sub.weights
    v = _chol_solve(s_chol, 1.0 - b.T @ w_sub)
    u = weights_sub.solve(b @ v)

    m = len(full_cloud)
    w = np.empty(m)
    w[part.subset] = w_sub - u
    w[part.complement] = v

    chol = _block_lower(weights_sub.chol, g.T, s_chol)
    order = np.concatenate([part.subset[weights_sub.order], part.complement])
    state = WeightingState(
        cloud=full_cloud,
        weights=w,
        magnitude=float(w.sum()),
        factor=PackedFactor.from_dense(chol),
        order=order,
    )
    chol.flags.writeable = False
    object.__setattr__(state, "_dense_chol", chol)
    return state


def _block_lower(top: np.ndarray, bottom_left: np.ndarray, bottom_right: np.ndarray):
    ns = top.shape[0]
    m = ns + bottom_right.shape[0]
    chol = np.zeros((m, m))
    chol[:ns, :ns] = top
    chol[ns:, :ns] = bottom_left
    chol[ns:, ns:] = bottom_right
    return chol


def add_point(weights: WeightingState, x_new) -> tuple[WeightingState, float]:
    """Insert one point into a weighting by a rank-1 update.

    Costs O(m^2): two triangular solves against the retained factor plus a
    scalar Schur complement.  Returns the grown state and the magnitude
    increase ``gamma = Mag(X u {x}) - Mag(X) >= 0``.

    Raises
    ------
    DegenerateInput
        If the new point coincides with an existing one.
    IllConditioned
        If the scalar complement is nonpositive at working precision.
    """
    if weights.jitter:
        raise InvalidInput("rank-1 updates require an unjittered weighting state")
    x = np.asarray(x_new, dtype=np.float64).reshape(-1)
    cloud = weights.cloud
    if x.shape[0] != cloud.dim:
        raise InvalidInput(f"new point has dimension {x.shape[0]}, cloud has {cloud.dim}")
    if (cloud.points == x).all(axis=1).any():
        raise DegenerateInput("new point duplicates an existing point")

    m = len(cloud)
    b = point_similarity(cloud, x)
    c = weights.factor.solve_lower(m, b[weights.order])
    delta = 1.0 - c @ c
    if delta <= 0.0:
        raise IllConditioned(
            f"nonpositive scalar Schur complement {delta:.3e}", pivot=m
        )
    u = np.empty(m)
    u[weights.order] = weights.factor.solve_upper(m, c)

    s1 = 1.0 - u.sum()
    v = s1 / delta
    gamma = s1 * v

    w = np.append(weights.weights - v * u, v)
    factor = weights.factor.append_row(m, np.append(c, np.sqrt(delta)))
    order = np.append(weights.order, m)
    for arr in (w, order):  # freeze in place: skip the defensive copy
        arr.flags.writeable = False
    state = WeightingState(
        cloud=cloud.append(x),
        weights=w,
        magnitude=float(w.sum()),
        factor=factor,
        order=order,
    )
    return state, float(gamma)


def find_shared_points(cloud_x: PointCloud, cloud_y: PointCloud) -> list[tuple[int, int]]:
    """Exact-coordinate matches between two clouds, as (index_x, index_y) pairs.

    Convenience for :func:`union_weighting`, which deliberately never infers
    the correspondence itself.
    """
    lookup = {}
    for i, row in enumerate(cloud_x.points):
        lookup.setdefault(row.tobytes(), i)
    pairs = []
    for j, row in enumerate(cloud_y.points):
        i = lookup.get(row.tobytes())
        if i is not None:
            pairs.append((i, j))
    return pairs


def union_weighting(
    weights_x: WeightingState,
    weights_y: WeightingState,
    shared: list[tuple[int, int]],
) -> WeightingState:
    """Weighting of the union of two clouds with a declared intersection.

    ``shared`` lists (index in X, index in Y) pairs that are the same point;
    those coordinates must match exactly.  The union cloud keeps X's points
    first, followed by Y's unshared points in Y order.  The result agrees
    with the corrected inclusion-exclusion identity for weights and
    magnitude, which the test suite checks explicitly.
    """
    cx, cy = weights_x.cloud, weights_y.cloud
    if cx.metric != cy.metric or cx.scale != cy.scale:
        raise InvalidInput("clouds disagree on metric or scale")
    shared = [(int(i), int(j)) for i, j in shared]
    xs = [i for i, _ in shared]
    ys = [j for _, j in shared]
    if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
        raise InvalidInput("shared correspondence repeats an index")
    for i, j in shared:
        if not (0 <= i < len(cx) and 0 <= j < len(cy)):
            raise InvalidInput(f"shared pair ({i}, {j}) out of range")
        if not np.array_equal(cx.points[i], cy.points[j]):
            raise InvalidInput(f"shared pair ({i}, {j}) has mismatched coordinates")

    extra = np.setdiff1d(np.arange(len(cy)), np.asarray(ys, dtype=np.intp))
    if extra.size == 0:
        return weights_x
    union_cloud = PointCloud(
        np.vstack([cx.points, cy.points[extra]]), cx.metric, cx.scale
    )
    part = BlockPartition.from_subset(len(union_cloud), np.arange(len(cx)))
    return extend_weighting(weights_x, union_cloud, part)


def disjoint_gluing(
    weights_sub: WeightingState,
    weights_rest: WeightingState,
    full_cloud: PointCloud,
    part: BlockPartition,
) -> WeightingState:
    """Glue weightings of the two halves of a partition into the whole.

    Implements the paired restriction identities: each half of the glued
    vector solves a Schur-complement system driven by the other half's
    weights.
    """
    _check_subset_state(weights_sub, full_cloud, part)
    if part.complement.size == 0:
        return weights_sub
    rest_part = BlockPartition.from_subset(len(full_cloud), part.complement)
    _check_subset_state(weights_rest, full_cloud, rest_part)
    if part.subset.size == 0:
        return weights_rest
    if full_cloud.has_duplicates():
        raise DegenerateInput("duplicate points make the similarity matrix singular")

    a = _cross_block(full_cloud, part.subset, part.subset)
    np.fill_diagonal(a, 1.0)
    d = _cross_block(full_cloud, part.complement, part.complement)
    np.fill_diagonal(d, 1.0)
    b = _cross_block(full_cloud, part.subset, part.complement)

    # zeta_X / zeta_sub drives the complement restriction, and vice versa.
    g = solve_triangular(weights_sub.chol, b[weights_sub.order], lower=True, check_finite=False)
    s_rest = d - g.T @ g
    s_rest_chol = _cholesky_spd(s_rest)
    w_rest = _chol_solve(s_rest_chol, 1.0 - b.T @ weights_sub.weights)

    h = solve_triangular(weights_rest.chol, b.T[weights_rest.order], lower=True, check_finite=False)
    s_sub = a - h.T @ h
    s_sub_chol = _cholesky_spd(s_sub)
    w_sub = _chol_solve(s_sub_chol, 1.0 - b @ weights_rest.weights)

    m = len(full_cloud)
    w = np.empty(m)
    w[part.subset] = w_sub
    w[part.complement] = w_rest

    chol = _block_lower(weights_sub.chol, g.T, s_rest_chol)
    order = np.concatenate([part.subset[weights_sub.order], part.complement])
    state = WeightingState(
        cloud=full_cloud,
        weights=w,
        magnitude=float(w.sum()),
        factor=PackedFactor.from_dense(chol),
        order=order,
    )
    chol.flags.writeable = False
    object.__setattr__(state, "_dense_chol", chol)
    return state
