"""Serializable experiment records.

Every report echoes the full configuration that produced it, and every
aggregate it carries is recomputable from the per-run records, so a report
is sufficient to audit or reproduce its experiment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import InvalidInput

FORMAT_NAME = "magweight-report"
FORMAT_VERSION = 1


def _mean(xs):
    return sum(xs) / len(xs)


def _std(xs):
    mu = _mean(xs)
    return (_mean([(x - mu) ** 2 for x in xs])) ** 0.5


@dataclass
class ExperimentReport:
    """One experiment: config echo, per-run records, derived aggregates."""

    experiment: str
    dataset: str
    config: dict
    runs: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)

    def recompute_aggregates(self) -> dict:
        """Derive the aggregate block from the per-run records alone."""
        out = {}
        accs = [r["accuracy"] for r in self.runs if "accuracy" in r]
        if accs:
            out["mean_accuracy"] = _mean(accs)
            out["std_accuracy"] = _std(accs)
        histories = [r["history"] for r in self.runs if "history" in r]
        if histories and len({len(h) for h in histories}) == 1:
            out["mean_curve"] = [
                _mean([h[i] for h in histories]) for i in range(len(histories[0]))
            ]
        return out

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "experiment": self.experiment,
            "dataset": self.dataset,
            "config": self.config,
            "runs": self.runs,
            "aggregates": self.aggregates,
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentReport":
        if doc.get("format") != FORMAT_NAME:
            raise InvalidInput("not a magweight report")
        if doc.get("version") != FORMAT_VERSION:
            raise InvalidInput(f"unsupported report version {doc.get('version')}")
        return cls(
            experiment=doc["experiment"],
            dataset=doc["dataset"],
            config=doc["config"],
            runs=doc["runs"],
            aggregates=doc["aggregates"],
        )

    @classmethod
    def load(cls, path) -> "ExperimentReport":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
