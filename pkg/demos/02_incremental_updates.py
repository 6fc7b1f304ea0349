#!/usr/bin/env python3
# Growing a weighting without refactorizing: block extension, rank-1
# insertion, gluing, and the corrected inclusion-exclusion for unions.

import time

import numpy as np

from magweight import (
    BlockPartition,
    PointCloud,
    add_point,
    disjoint_gluing,
    extend_weighting,
    find_shared_points,
    union_weighting,
    weighting,
)

rng = np.random.default_rng(1)
pts = rng.normal(size=(40, 3))
cloud = PointCloud(pts)
direct = weighting(cloud)

# --- extend a 30-point weighting to all 40 points ---------------------------
# Only the 10x10 Schur complement of the known block is factorized.
part = BlockPartition.from_subset(40, np.arange(30))
sub = weighting(cloud.subcloud(part.subset))
extended = extend_weighting(sub, cloud, part)
print("extend_weighting max |error| vs direct solve:",
      np.abs(extended.weights - direct.weights).max())

# --- one point at a time -----------------------------------------------------
# add_point costs O(m^2); gamma = Mag(X u {x}) - Mag(X) is never negative,
# and a far-away point contributes almost exactly +1.
state = weighting(cloud.subcloud(np.arange(39)))
state, gamma_near = add_point(state, pts[39])
_, gamma_far = add_point(state, np.array([50.0, 0.0, 0.0]))
print(f"gamma for an interior-ish point {gamma_near:.5f}, "
      f"for a far point {gamma_far:.5f}")

# --- gluing two halves -------------------------------------------------------
half = BlockPartition.from_subset(40, np.arange(0, 40, 2))
glued = disjoint_gluing(
    weighting(cloud.subcloud(half.subset)),
    weighting(cloud.subcloud(half.complement)),
    cloud,
    half,
)
print("disjoint_gluing max |error| vs direct solve:",
      np.abs(glued.weights - direct.weights).max())

# --- union with an overlap ---------------------------------------------------
other = PointCloud(np.vstack([pts[25:40], rng.normal(size=(6, 3)) + 1.0]))
wx, wy = weighting(cloud), weighting(other)
pairs = find_shared_points(cloud, other)
merged = union_weighting(wx, wy, pairs)
check = weighting(merged.cloud)
print(f"union of 40 + 21 points sharing {len(pairs)}: "
      f"max |error| {np.abs(merged.weights - check.weights).max():.2e}, "
      f"magnitude {merged.magnitude:.4f}")

# --- why bother: incremental build vs refactorizing every step ---------------
m = 600
big = rng.normal(size=(m, 2))
t0 = time.perf_counter()
state = weighting(PointCloud(big[:1]))
for i in range(1, m):
    state, _ = add_point(state, big[i])
incremental = time.perf_counter() - t0

t0 = time.perf_counter()
for k in range(1, m + 1):
    full = weighting(PointCloud(big[:k]))
refactorized = time.perf_counter() - t0
print(f"\nbuilding {m} points: add_point {incremental:.2f}s, "
      f"refactorize-each-step {refactorized:.2f}s "
      f"({refactorized / incremental:.0f}x)")
print("final weights agree:",
      np.abs(state.weights - full.weights).max() < 1e-10)
