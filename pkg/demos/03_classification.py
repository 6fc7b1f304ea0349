#!/usr/bin/env python3
# The weighting-vector classifier: insert the query point into each class's
# point set; the class where it lands most "interior" (lowest weight) wins.

import numpy as np

from magweight import LabeledDataset, PointCloud, fit, tune_scales
from magweight.datasets import gen_checkerboard, stratified_split

rng = np.random.default_rng(2)

# --- two blobs ----------------------------------------------------------------
inner = rng.normal(size=(60, 2))
outer = rng.normal(size=(60, 2)) + np.array([6.0, 0.0])
train = LabeledDataset(
    PointCloud(np.vstack([inner, outer])), np.repeat([0, 1], 60)
)
model = fit(train)

x = np.array([5.8, 0.3])  # sits inside class 1's blob
scores = model.score(x)
print(f"scores for {x}: class0 {scores[0]:.4f}, class1 {scores[1]:.4f} "
      f"-> predict {model.predict(x)} (lower weight = more interior)")

# --- checkerboard with a held-out evaluation ------------------------------------
board = gen_checkerboard(4, 2000, seed=42)
tr, te = stratified_split(board, 0.7, seed=0)
board_model = fit(tr)
predicted = board_model.predict_batch(te.cloud.points)
accuracy = np.mean(np.asarray(predicted) == te.labels)
print(f"\n4x4 checkerboard, defaults (t=1, abs scale): accuracy {accuracy:.3f}")

# --- per-class scale tuning -----------------------------------------------------
scales = tune_scales(tr.subset(np.arange(0, len(tr), 4)), [0.5, 1, 2, 4, 8], folds=3)
tuned = fit(tr, scales=scales)
predicted = tuned.predict_batch(te.cloud.points)
print(f"tuned per-class t = {scales.tolist()} -> accuracy "
      f"{np.mean(np.asarray(predicted) == te.labels):.3f}")

# --- rejecting an unseen class with NULL ----------------------------------------
null_model = fit(train, scale_mode="percentile", null_threshold=1 - 1e-11)
strangers = rng.normal(size=(5, 2)) + np.array([40.0, -40.0])
verdicts = null_model.predict_batch(strangers)
print("\nfar-away points under a percentile threshold:",
      ["NULL" if v is None else v for v in verdicts])
print("a familiar point still classifies:",
      null_model.predict(np.array([0.2, -0.1])))
