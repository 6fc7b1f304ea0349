"""Magnitude-based outlier detection.

Boundary points and outliers both carry high weight, so thresholding alone
over-rejects.  The detector first keeps every point whose |weight| sits
below median + 1.5 std, then walks the remaining candidates in ascending
|weight| order and readmits each one whose magnitude increase against the
current inlier set stays below tau: genuine boundary points barely move the
magnitude, isolated points add almost a full unit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PointCloud, WeightingState, point_similarity, weighting
from .errors import IllConditioned, InvalidInput
from .schur import add_point


@dataclass(frozen=True)
class OutlierReport:
    """Inlier/outlier split with the evidence that produced it."""

    inlier_indices: np.ndarray
    outlier_indices: np.ndarray
    weights: np.ndarray
    gammas: dict  # candidate index -> magnitude increase when screened
    threshold: float
    tau: float

    def is_outlier(self, index: int) -> bool:
        return bool(np.isin(index, self.outlier_indices))

    def to_text(self) -> str:
        """One line per point: index, weight, gamma if screened, verdict."""
        lines = ["index\tweight\tgamma\tverdict"]
        outliers = set(self.outlier_indices.tolist())
        for i, w in enumerate(self.weights):
            gamma = self.gammas.get(i)
            lines.append(
                "\t".join(
                    [
                        str(i),
                        f"{w:.12g}",
                        "" if gamma is None else f"{gamma:.12g}",
                        "outlier" if i in outliers else "inlier",
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def score_new_point(weights: WeightingState, x) -> float:
    """Magnitude increase if ``x`` joined the set; 0 for an exact replay.

    The rank-1 insertion formula gives
    ``gamma = (1 - b . w)^2 / (1 - b . zeta^-1 b)``, nonnegative whenever
    the similarity matrix stays positive definite.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    cloud = weights.cloud
    if (cloud.points == x).all(axis=1).any():
        return 0.0
    b = point_similarity(cloud, x)
    c = weights.half_solve(b)
    delta = 1.0 - c @ c
    if delta <= 0.0:
        raise IllConditioned(
            f"nonpositive scalar Schur complement {delta:.3e}", pivot=len(cloud)
        )
    s1 = 1.0 - b @ weights.weights
    return float(s1 * (s1 / delta))


def detect_outliers(
    cloud: PointCloud,
    tau: float,
    freeze_inliers: bool = False,
) -> OutlierReport:
    """Split a cloud into inliers and outliers by weight and gamma screening.

    Parameters
    ----------
    cloud : PointCloud
        At least 3 pairwise-distinct points.
    tau : float
        Nonnegative screening threshold; a candidate whose magnitude
        increase is below tau is readmitted as an inlier.  ``inf`` readmits
        everything, ``0`` readmits nothing.
    freeze_inliers : bool
        When True, every candidate is screened against the initial inlier
        set instead of the growing one.
    """
    if not tau >= 0.0:
        raise InvalidInput(f"tau must be nonnegative, got {tau}")
    if len(cloud) < 3:
        raise InvalidInput("outlier detection needs at least 3 points")

    state = weighting(cloud)
    w = state.weights
    threshold = float(np.median(w) + 1.5 * np.std(w))
    abs_w = np.abs(w)
    inlier_mask = abs_w <= threshold

    if not inlier_mask.any():
        # heavily skewed weight distributions can empty the seed set; keep
        # the single most interior point so screening stays well-defined
        inlier_mask[np.argmin(abs_w)] = True

    candidates = np.flatnonzero(~inlier_mask)
    candidates = candidates[np.lexsort((candidates, abs_w[candidates]))]

    inliers = list(np.flatnonzero(inlier_mask))
    gammas = {}
    if candidates.size:
        current = weighting(cloud.subcloud(inliers))
        for idx in candidates:
            x = cloud.points[idx]
            if freeze_inliers:
                gamma = score_new_point(current, x)
                accepted = gamma < tau
            else:
                grown, gamma = add_point(current, x)
                accepted = gamma < tau
                if accepted:
                    current = grown
            gammas[int(idx)] = float(gamma)
            if accepted:
                inliers.append(int(idx))

    inlier_idx = np.sort(np.asarray(inliers, dtype=np.intp))
    mask = np.zeros(len(cloud), dtype=bool)
    mask[inlier_idx] = True
    return OutlierReport(
        inlier_indices=inlier_idx,
        outlier_indices=np.flatnonzero(~mask),
        weights=w,
        gammas=gammas,
        threshold=threshold,
        tau=float(tau),
    )
