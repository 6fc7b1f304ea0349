#!/usr/bin/env python3
# Active learning with weighting-vector queries: per predicted class, label
# the most interior point (min |w|, exploitation) and the most boundary
# point (max |w|, exploration), four labels per round.

import numpy as np

from magweight import LabeledDataset, PointCloud, run_session
from magweight.bench import run_al_bench
from magweight.datasets import stratified_split

rng = np.random.default_rng(3)

quads = [((0.0, 0.0), 0), ((6.0, 6.0), 0), ((0.0, 6.0), 1), ((6.0, 0.0), 1)]
pts = np.vstack([rng.normal(size=(40, 2)) * 0.7 + c for c, _ in quads])
labels = np.concatenate([np.full(40, l) for _, l in quads])
data = LabeledDataset(PointCloud(pts), labels)

# --- one session, step by step ---------------------------------------------
pool, test = stratified_split(data, 0.67, seed=0)
report = run_session(pool, test, strategy="weighting", budget=24, seed=0)
print("iter  |L|  queried            accuracy")
for rec in report.runs:
    print(f"{rec['iteration']:4d}  {rec['n_labeled']:3d}  "
          f"{str(rec['queried']):18s} {rec['accuracy']:.3f}")

# --- strategy comparison, averaged over seeded runs --------------------------
bench = run_al_bench(
    data,
    strategies=("weighting", "uncertainty", "random"),
    budget=24,
    runs=10,
    seed=1,
)
print("\nmean accuracy per iteration (10 runs, XOR-style pool):")
curves = bench.aggregates["mean_curves"]
header = "labels:" + "".join(f"{2 + 4 * i:7d}" for i in range(7))
print(header)
for name, curve in curves.items():
    print(f"{name:>12s} " + "".join(f"{v:7.3f}" for v in curve))
