#!/usr/bin/env python3
"""Regenerate the CSV datasets bundled under data/.

The benchmark datasets originate from scikit-learn's bundled copies (iris,
8x8 digits); this script converts them to the headered CSV layout that
magweight.datasets.load_csv ingests.  Run from the repository root:

    python3 scripts/make_datasets.py
"""

import csv
import pathlib

from sklearn.datasets import load_digits, load_iris

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def dump(name, features, labels, feature_names, label_names):
    path = OUT / f"{name}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(feature_names) + ["label"])
        for row, label in zip(features, labels):
            writer.writerow([repr(float(v)) for v in row] + [label_names[label]])
    print(f"wrote {path} ({len(labels)} rows)")


def main():
    OUT.mkdir(exist_ok=True)
    iris = load_iris()
    dump(
        "iris",
        iris.data,
        iris.target,
        [n.replace(" (cm)", "").replace(" ", "_") for n in iris.feature_names],
        list(iris.target_names),
    )
    digits = load_digits()
    dump(
        "digits",
        digits.data,
        digits.target,
        [f"p{i}" for i in range(digits.data.shape[1])],
        [str(i) for i in range(10)],
    )


if __name__ == "__main__":
    main()
