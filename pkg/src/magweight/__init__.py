"""Metric-space magnitude and weighting vectors for machine learning.

The weighting vector w of a finite point set solves ``zeta w = 1`` for the
similarity matrix ``zeta[i, j] = exp(-t d(x_i, x_j))``; its entries swell
near the boundary of the set and its sum, the magnitude, behaves like an
effective point count.  This package computes weightings directly and
incrementally (Schur-complement block updates, rank-1 point insertion) and
applies them to classification, pool-based active learning, and outlier
detection, with a benchmark harness, a CLI, and an interactive labeling
server on top.
"""

from .active import (
    ALSession,
    AutomatedOracle,
    KernelRidgeModel,
    laplacian_kernel,
    run_session,
    train_classifier,
    uncertainty_query,
    weighting_query,
)
from .classify import (
    FittedClassifier,
    LabeledDataset,
    fit,
    load_classifier,
    save_classifier,
    tune_scales,
)
from .core import (
    MagnitudeSweep,
    PointCloud,
    SimilarityMatrix,
    WeightingState,
    distance_matrix,
    magnitude_function,
    similarity_matrix,
    weighting,
)
from .datasets import (
    gen_checkerboard,
    gen_outlier_mixture,
    load_csv,
    load_points_csv,
    save_csv,
    stratified_split,
)
from .errors import DegenerateInput, IllConditioned, InvalidInput, MagweightError
from .outlier import OutlierReport, detect_outliers, score_new_point
from .reports import ExperimentReport
from .schur import (
    BlockPartition,
    RhoMatrix,
    add_point,
    disjoint_gluing,
    extend_weighting,
    find_shared_points,
    rho,
    schur_complement,
    union_weighting,
)

__version__ = "0.1.0"

__all__ = [
    "ALSession",
    "AutomatedOracle",
    "BlockPartition",
    "DegenerateInput",
    "ExperimentReport",
    "FittedClassifier",
    "IllConditioned",
    "InvalidInput",
    "KernelRidgeModel",
    "LabeledDataset",
    "MagnitudeSweep",
    "MagweightError",
    "OutlierReport",
    "PointCloud",
    "RhoMatrix",
    "SimilarityMatrix",
    "WeightingState",
    "add_point",
    "detect_outliers",
    "disjoint_gluing",
    "distance_matrix",
    "extend_weighting",
    "find_shared_points",
    "fit",
    "gen_checkerboard",
    "gen_outlier_mixture",
    "laplacian_kernel",
    "load_classifier",
    "load_csv",
    "load_points_csv",
    "magnitude_function",
    "rho",
    "run_session",
    "save_classifier",
    "save_csv",
    "schur_complement",
    "score_new_point",
    "similarity_matrix",
    "stratified_split",
    "train_classifier",
    "tune_scales",
    "uncertainty_query",
    "union_weighting",
    "weighting",
    "weighting_query",
]
