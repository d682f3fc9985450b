"""Synthetic ground truth: uniform binary features labeled by a known
two-level decision set, used for recovery and trade-off testing.

The planted descriptors partition the feature space by a nested chain on the
leading features; each descriptor block is split into rules by its own fresh
feature, so rule bodies partition the space, every body has clean support,
and a perfect approximation exists by construction. Optional label noise
flips a fraction of labels uniformly.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field

from .data import CATEGORICAL, Conjunction, Dataset, FeatureSchema, Predicate
from .decision_set import Rule
from .errors import SchemaError

LABELS = ("A", "B")


@dataclass(frozen=True)
class PlantedSpec:
    n_instances: int = 2000
    n_features: int = 10
    n_descriptors: int = 3
    rules_per_descriptor: int = 2
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        needed = (self.n_descriptors - 1
                  + self.n_descriptors * (self.rules_per_descriptor - 1))
        if needed > self.n_features:
            raise SchemaError(
                f"{self.n_features} features cannot host {self.n_descriptors} "
                f"descriptors with {self.rules_per_descriptor} rules each")
        if not 0 <= self.noise < 1:
            raise SchemaError("noise must be in [0, 1)")
        if self.n_descriptors < 2 or self.rules_per_descriptor < 2:
            raise SchemaError("need >= 2 descriptors and >= 2 rules per descriptor")


@dataclass
class PlantedModel:
    spec: PlantedSpec
    rules: list[Rule]
    feature_names: list[str] = field(default_factory=list)

    def truth_dict(self) -> dict:
        return {
            "n_instances": self.spec.n_instances,
            "n_features": self.spec.n_features,
            "noise": self.spec.noise,
            "seed": self.spec.seed,
            "rules": [{
                "q": [p.render() for p in r.descriptor.sorted_predicates()],
                "s": [p.render() for p in r.condition.sorted_predicates()],
                "c": r.label,
            } for r in self.rules],
        }


def _chain(names: list[str], member: int) -> Conjunction:
    """Nested partition: zeros on the features before `member`, one at it;
    the final block is all zeros."""
    preds = [Predicate(n, "==", "0") for n in names[:member]]
    if member < len(names):
        preds.append(Predicate(names[member], "==", "1"))
    return Conjunction(preds)


def plant(spec: PlantedSpec) -> PlantedModel:
    names = [f"f{j}" for j in range(spec.n_features)]
    d, r = spec.n_descriptors, spec.rules_per_descriptor
    descriptor_feats = names[:d - 1]
    rules = []
    split_base = d - 1
    for i in range(d):
        descriptor = _chain(descriptor_feats, i)
        block_feats = names[split_base + i * (r - 1):split_base + (i + 1) * (r - 1)]
        for j in range(r):
            condition = _chain(block_feats, j)
            rules.append(Rule(descriptor, condition, LABELS[(i + j) % len(LABELS)]))
    return PlantedModel(spec, rules, names)


def generate(spec: PlantedSpec) -> tuple[PlantedModel, Dataset]:
    model = plant(spec)
    rng = random.Random(spec.seed)
    rows = [{n: str(rng.randint(0, 1)) for n in model.feature_names}
            for _ in range(spec.n_instances)]
    labels = []
    for row in rows:
        fired = [r for r in model.rules if r.holds_on(row)]
        assert len(fired) == 1, "planted rules must partition the space"
        label = fired[0].label
        if spec.noise and rng.random() < spec.noise:
            label = LABELS[1 - LABELS.index(label)]
        labels.append(label)
    schema = [FeatureSchema(n, CATEGORICAL, values=("0", "1"))
              for n in model.feature_names]
    return model, Dataset(schema, rows, labels)


def write_csv(ds: Dataset, path: str) -> None:
    names = ds.feature_names()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + [ds.label_column])
        for row, label in zip(ds.rows, ds.labels):
            writer.writerow([row[n] for n in names] + [label])
