#!/usr/bin/env python3
# Weighting vectors and magnitude: the basics.
#
# The weighting vector w solves zeta w = 1 for the similarity matrix
# zeta[i, j] = exp(-t d(x_i, x_j)).  Its sum is the magnitude of the set,
# an "effective number of points", and its entries swell near the boundary.

import numpy as np

from magweight import PointCloud, magnitude_function, weighting

rng = np.random.default_rng(0)

# --- two points -----------------------------------------------------------
# Closed form: each weight is 1 / (1 + e^-d), magnitude 2 / (1 + e^-d).
for d in (0.1, 1.0, 5.0):
    state = weighting(PointCloud(np.array([0.0, d])))
    print(f"two points at distance {d}: weights {state.weights.round(6)}, "
          f"magnitude {state.magnitude:.6f}")

# --- boundary detection on a line ------------------------------------------
# Equally spaced points on a segment: the endpoints carry visibly more
# weight than the (identical) interior weights.
line = weighting(PointCloud(np.linspace(0.0, 2.0, 9)))
print("\nline weights:", line.weights.round(4))
print("endpoints dominate:", line.weights[0] > line.weights[1:-1].max())

# --- symmetry ---------------------------------------------------------------
# Vertices of a regular polytope share one weight by symmetry.
square = weighting(PointCloud(np.array([[0, 0], [0, 1], [1, 0], [1, 1]], float)))
print("\nsquare weights:", square.weights.round(8), "(all equal)")

# --- the magnitude function -------------------------------------------------
# t -> Mag(tX) interpolates between 1 (t -> 0+) and the point count
# (t -> infinity).  101 points on [0, 4] approach Mag([0,4]) = 3 at t = 1.
cloud = PointCloud(np.linspace(0.0, 4.0, 101))
sweep = magnitude_function(cloud, np.geomspace(0.01, 100.0, 9))
print("\n      t    Mag(tX)")
for t, mag in sweep:
    print(f"{t:9.3f}  {mag:9.4f}")
print("at t=1 the interval estimate is",
      f"{weighting(cloud).magnitude:.5f} (1 + length/2 = 3.0)")

# --- interior vs boundary in the plane --------------------------------------
blob = rng.normal(size=(300, 2))
state = weighting(PointCloud(blob))
radius = np.linalg.norm(blob, axis=1)
inner = state.weights[radius < 1.0].mean()
outer = state.weights[radius > 2.0].mean()
print(f"\nGaussian blob: mean weight inside r<1 {inner:.4f}, outside r>2 {outer:.4f}")
