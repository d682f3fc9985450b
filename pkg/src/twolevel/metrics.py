"""The eight rule-list measures: fidelity, unambiguity, interpretability.

All counts are exact integers computed from coverage bitsets:

- disagreement: per rule, instances its body covers whose black-box label
  differs from the rule label; an instance covered by several disagreeing
  rules counts once per such rule.
- ruleoverlap: over all ordered pairs of distinct rules, instances covered by
  both bodies (each unordered clash counts twice).
- cover: instances covered by at least one rule body.
- size, maxwidth, numpreds, numdsets: rule count; widest descriptor or
  condition; total predicates with descriptors recounted per rule; distinct
  descriptors (compared by predicate-set equality).
- featureoverlap: per rule, feature names shared by its descriptor and its
  condition, summed over rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .data import Dataset, popcount
from .decision_set import Rule, TwoLevelDecisionSet, agreement_rate


@dataclass(frozen=True)
class MetricsReport:
    disagreement: int
    ruleoverlap: int
    cover: int
    size: int
    maxwidth: int
    numpreds: int
    numdsets: int
    featureoverlap: int
    agreement_rate: float
    cover_fraction: float
    ruleoverlap_fraction: float


def fidelity_metrics(rules: Sequence[Rule], ds: Dataset) -> int:
    total = 0
    for r in rules:
        body = r.body_bits(ds)
        total += popcount(body) - popcount(body & ds.label_masks.get(r.label, 0))
    return total


def unambiguity_metrics(rules: Sequence[Rule], ds: Dataset) -> tuple[int, int]:
    bodies = [r.body_bits(ds) for r in rules]
    overlap = 0
    union = 0
    for i, bi in enumerate(bodies):
        union |= bi
        for bj in bodies[i + 1:]:
            overlap += 2 * popcount(bi & bj)
    return overlap, popcount(union)


def interpretability_metrics(rules: Sequence[Rule]) -> tuple[int, int, int, int, int]:
    if not rules:
        return 0, 0, 0, 0, 0
    size = len(rules)
    maxwidth = max(max(r.descriptor.width, r.condition.width) for r in rules)
    numpreds = sum(r.descriptor.width + r.condition.width for r in rules)
    numdsets = len({r.descriptor for r in rules})
    featureoverlap = sum(len(r.descriptor.features & r.condition.features) for r in rules)
    return size, maxwidth, numpreds, numdsets, featureoverlap


def report(model: TwoLevelDecisionSet, ds: Dataset) -> MetricsReport:
    rules = list(model.rules)
    disagreement = fidelity_metrics(rules, ds)
    ruleoverlap, cover = unambiguity_metrics(rules, ds)
    size, maxwidth, numpreds, numdsets, featureoverlap = interpretability_metrics(rules)
    return MetricsReport(
        disagreement=disagreement,
        ruleoverlap=ruleoverlap,
        cover=cover,
        size=size,
        maxwidth=maxwidth,
        numpreds=numpreds,
        numdsets=numdsets,
        featureoverlap=featureoverlap,
        agreement_rate=agreement_rate(model, ds),
        cover_fraction=cover / ds.n,
        ruleoverlap_fraction=ruleoverlap / ds.n,
    )
