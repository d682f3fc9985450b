"""Two-level decision set: rules (descriptor, condition, label) plus default
and tie-breaking behavior.

An instance satisfying exactly one rule body gets that rule's label; one
satisfying none gets the default label (majority black-box label over the
uncovered instances); one satisfying several gets the label of the satisfied
rule with the highest agreement rate. Equal agreement rates are resolved by a
canonical ordering of the rules themselves (feature/op/value keys), never by
list position, so predictions are invariant under permutations of the rule
list. Both the default and tie-break policies are pluggable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .data import Conjunction, Dataset, popcount

PROV_RULE = "rule"
PROV_DEFAULT = "default"
PROV_TIE = "tie-break"


@dataclass(frozen=True)
class Rule:
    descriptor: Conjunction   # outer IF, scopes a feature subspace
    condition: Conjunction    # inner IF within the subspace
    label: str

    def body_bits(self, ds: Dataset) -> int:
        return ds.coverage(self.descriptor) & ds.coverage(self.condition)

    def holds_on(self, instance: Mapping[str, object]) -> bool:
        return self.descriptor.holds_on(instance) and self.condition.holds_on(instance)

    def sort_key(self):
        return (self.descriptor.sort_key(), self.condition.sort_key(), self.label)


@dataclass(frozen=True)
class Prediction:
    label: str
    kind: str                    # rule | default | tie-break
    rule_index: int | None       # satisfied (or winning) rule, None for default
    fired: tuple[int, ...]       # every satisfied rule index


def majority_label(ds: Dataset, mask: int) -> str:
    """Majority black-box label over a bitset of instances.

    Empty mask falls back to the global majority. Ties go to the label with
    the higher global frequency, then the lexicographically smallest.
    """
    if mask == 0:
        mask = ds.all_mask
    counts = {c: popcount(mask & ds.label_masks[c]) for c in ds.label_set}
    best = max(counts.values())
    tied = [c for c, k in counts.items() if k == best]
    return min(tied, key=lambda c: (-ds.label_counts[c], c))


DefaultFn = Callable[[Dataset, int], str]
TieFn = Callable[["TwoLevelDecisionSet", Sequence[int]], int]


def highest_agreement_tie(model: "TwoLevelDecisionSet", fired: Sequence[int]) -> int:
    return min(fired, key=lambda i: (-model.agreement_rates[i],
                                     model.rules[i].sort_key()))


class TwoLevelDecisionSet:
    """Fitted rule list with default label and per-rule agreement rates."""

    def __init__(self, rules: Sequence[Rule], default_label: str,
                 agreement_rates: Sequence[float], tie_fn: TieFn = highest_agreement_tie):
        if len(agreement_rates) != len(rules):
            raise ValueError("one agreement rate per rule required")
        self.rules = tuple(rules)
        self.default_label = default_label
        self.agreement_rates = tuple(agreement_rates)
        self.tie_fn = tie_fn

    def predict(self, index: int, ds: Dataset) -> Prediction:
        fired = tuple(i for i, r in enumerate(self.rules)
                      if ds.satisfies(r.descriptor, index) and ds.satisfies(r.condition, index))
        return self._resolve(fired)

    def predict_instance(self, instance: Mapping[str, object]) -> Prediction:
        """Predict for an ad-hoc instance (not necessarily in any dataset)."""
        fired = tuple(i for i, r in enumerate(self.rules) if r.holds_on(instance))
        return self._resolve(fired)

    def _resolve(self, fired: tuple[int, ...]) -> Prediction:
        if not fired:
            return Prediction(self.default_label, PROV_DEFAULT, None, fired)
        if len(fired) == 1:
            return Prediction(self.rules[fired[0]].label, PROV_RULE, fired[0], fired)
        winner = self.tie_fn(self, fired)
        return Prediction(self.rules[winner].label, PROV_TIE, winner, fired)

    def predict_all(self, ds: Dataset) -> list[Prediction]:
        return [self.predict(i, ds) for i in range(ds.n)]


def rule_agreement_rate(rule: Rule, ds: Dataset) -> float:
    """Fraction of the rule body's coverage the black box labels the same.

    Zero-coverage rules get rate 0 so they lose every tie.
    """
    body = rule.body_bits(ds)
    covered = popcount(body)
    if covered == 0:
        return 0.0
    agree = popcount(body & ds.label_masks.get(rule.label, 0))
    return agree / covered


def fit_default_and_ties(rules: Sequence[Rule], ds: Dataset,
                         default_fn: DefaultFn | None = None,
                         tie_fn: TieFn = highest_agreement_tie) -> TwoLevelDecisionSet:
    """Compute the default label and agreement rates for a rule list.

    The rule order given by the caller is preserved for display and indexing.
    """
    uncovered = ds.all_mask
    for r in rules:
        uncovered &= ~r.body_bits(ds)
    if default_fn is not None:
        default = default_fn(ds, uncovered)
    else:
        default = majority_label(ds, uncovered)
    rates = [rule_agreement_rate(r, ds) for r in rules]
    return TwoLevelDecisionSet(rules, default, rates, tie_fn=tie_fn)


def agreement_rate(model: TwoLevelDecisionSet, ds: Dataset) -> float:
    """Fraction of instances whose predicted label matches the black box."""
    hits = sum(1 for i, p in enumerate(model.predict_all(ds)) if p.label == ds.labels[i])
    return hits / ds.n


def usage_counts(model: TwoLevelDecisionSet, ds: Dataset) -> dict[str, int]:
    """How often predictions needed the default or the tie-break function."""
    preds = model.predict_all(ds)
    return {
        "default": sum(1 for p in preds if p.kind == PROV_DEFAULT),
        "tiebreak": sum(1 for p in preds if p.kind == PROV_TIE),
    }
