"""Frequent-conjunction mining and the candidate domain for rule search.

Apriori runs over predicate "items": instance i contains item p iff bit i of
the predicate's coverage bitset is set. Level k candidates come from joining
level k-1 itemsets sharing a (k-2)-prefix, pruned by the anti-monotonicity of
support, then counted by ANDing bitsets. Output order is deterministic:
support descending, width ascending, lexicographic on predicate keys.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .data import Conjunction, Dataset, Predicate, popcount
from .errors import EmptyCandidatesError, SchemaError, UnsatisfiableConjunctionError


@dataclass(frozen=True)
class MinerConfig:
    min_support: float = 0.05
    max_width: int = 2
    max_candidates: int = 200
    user_features: frozenset | None = None

    def __post_init__(self):
        if not 0 < self.min_support <= 1:
            raise SchemaError("min_support must be in (0, 1]")
        if self.max_width < 1:
            raise SchemaError("max_width must be >= 1")
        if self.max_candidates < 1:
            raise SchemaError("max_candidates must be >= 1")
        if self.user_features is not None:
            object.__setattr__(self, "user_features", frozenset(self.user_features))

    def restricted(self, features) -> "MinerConfig":
        return MinerConfig(self.min_support, self.max_width, self.max_candidates,
                           frozenset(features))


def _min_count(cfg: MinerConfig, n: int) -> int:
    # guard against float slop in min_support * n; counts themselves are exact
    count = math.ceil(cfg.min_support * n - 1e-9)
    return max(1, count)


def mine(ds: Dataset, cfg: MinerConfig) -> list[Conjunction]:
    """All satisfiable conjunctions meeting support and width, capped and sorted."""
    if cfg.user_features is not None:
        unknown = cfg.user_features - set(ds.feature_names())
        if unknown:
            raise SchemaError(f"user features not in schema: {sorted(unknown)}")

    items = [p for p in sorted(ds.coverage_index, key=Predicate.sort_key)
             if cfg.user_features is None or p.feature in cfg.user_features]
    threshold = _min_count(cfg, ds.n)

    level = {}
    for p in items:
        bits = ds.coverage_index[p]
        if popcount(bits) >= threshold:
            level[(p,)] = bits
    if not level:
        raise EmptyCandidatesError(
            f"no single predicate reaches support {cfg.min_support} "
            f"({threshold}/{ds.n} instances); lower min_support")

    frequent: dict[tuple, int] = dict(level)
    width = 1
    while level and width < cfg.max_width:
        width += 1
        ordered = sorted(level, key=lambda itemset: [p.sort_key() for p in itemset])
        next_level = {}
        for a, b in combinations(ordered, 2):
            if a[:-1] != b[:-1]:
                continue
            candidate = a + (b[-1],)   # ordered pairs share a prefix, b's tail is larger
            if candidate in next_level:
                continue
            if any(candidate[:i] + candidate[i + 1:] not in level
                   for i in range(len(candidate))):
                continue
            bits = level[a] & ds.coverage_index[candidate[-1]]
            if popcount(bits) >= threshold:
                next_level[candidate] = bits
        frequent.update(next_level)
        level = next_level

    out = []
    for itemset, bits in frequent.items():
        try:
            conj = Conjunction(itemset)
        except UnsatisfiableConjunctionError:
            continue
        out.append((conj, popcount(bits)))
    out.sort(key=lambda cs: (-cs[1], cs[0].width, cs[0].sort_key()))
    return [c for c, _ in out[:cfg.max_candidates]]


def dump_candidates(candidates: Sequence[Conjunction], ds: Dataset, path: str) -> None:
    """Debug dump, one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for c in candidates:
            fh.write(json.dumps({
                "predicates": [p.render() for p in c.sorted_predicates()],
                "support": popcount(ds.coverage(c)),
            }) + "\n")


@dataclass
class DomainElement:
    """One candidate rule: descriptor index, condition index, label, caches."""

    descriptor_idx: int
    condition_idx: int
    label: str
    body_bits: int
    body_count: int
    disagree: int          # instances covered by the body whose label differs
    numpreds: int
    featureoverlap: int    # feature names shared by descriptor and condition
    max_width: int


class CandidateDomain:
    """The ground set of (descriptor, condition, label) triples.

    Pairs with zero joint coverage are excluded. By default each included pair
    carries its majority black-box label (ties: higher global label frequency,
    then lexicographically smallest); all_labels=True keeps one element per
    label instead.
    """

    def __init__(self, ds: Dataset, descriptors: Sequence[Conjunction],
                 conditions: Sequence[Conjunction], all_labels: bool = False,
                 shared: bool = False):
        if not descriptors or not conditions:
            raise EmptyCandidatesError("candidate lists must be nonempty")
        if len(set(descriptors)) != len(descriptors) or len(set(conditions)) != len(conditions):
            raise SchemaError("candidate lists contain duplicates")
        self.ds = ds
        self.descriptors = list(descriptors)
        self.conditions = list(conditions)
        self.shared = shared
        self.all_labels = all_labels
        self.w_max = max(c.width for c in list(descriptors) + list(conditions))
        self.elements: list[DomainElement] = []
        self.excluded_pairs: list[tuple[int, int]] = []

        global_rank = {c: (-ds.label_counts[c], c) for c in ds.label_set}
        for qi, q in enumerate(self.descriptors):
            q_bits = ds.coverage(q)
            q_feats = q.features
            for si, s in enumerate(self.conditions):
                body = q_bits & ds.coverage(s)
                count = popcount(body)
                if count == 0:
                    self.excluded_pairs.append((qi, si))
                    continue
                overlap = len(q_feats & s.features)
                numpreds = q.width + s.width
                width = max(q.width, s.width)
                if all_labels:
                    labels = ds.label_set
                else:
                    per = {c: popcount(body & ds.label_masks[c]) for c in ds.label_set}
                    best = max(per.values())
                    labels = (min((c for c, k in per.items() if k == best),
                                  key=lambda c: global_rank[c]),)
                for c in labels:
                    disagree = count - popcount(body & ds.label_masks.get(c, 0))
                    self.elements.append(DomainElement(
                        qi, si, c, body, count, disagree, numpreds, overlap, width))

        self.descriptor_index = {q: i for i, q in enumerate(self.descriptors)}
        self.condition_index = {s: i for i, s in enumerate(self.conditions)}
        self.element_index = {(e.descriptor_idx, e.condition_idx, e.label): i
                              for i, e in enumerate(self.elements)}

    def element_for(self, descriptor: Conjunction, condition: Conjunction,
                    label: str) -> int:
        """Element id of a (descriptor, condition, label) triple; KeyError if absent."""
        key = (self.descriptor_index[descriptor], self.condition_index[condition], label)
        return self.element_index[key]

    def __len__(self) -> int:
        return len(self.elements)

    def majority_label(self, descriptor_idx: int, condition_idx: int) -> str | None:
        """Majority label of an included pair; None if the pair is excluded."""
        for e in self.elements:
            if e.descriptor_idx == descriptor_idx and e.condition_idx == condition_idx:
                return e.label
        return None

    def pair_count(self, descriptor_idx: int, condition_idx: int) -> int:
        q = self.descriptors[descriptor_idx]
        s = self.conditions[condition_idx]
        return popcount(self.ds.coverage(q) & self.ds.coverage(s))


def build_domain(ds: Dataset, nd_cfg: MinerConfig, dl_cfg: MinerConfig,
                 all_labels: bool = False) -> CandidateDomain:
    """Mine both candidate sets and assemble the ground set.

    Without user features the two sets share one mined list (mined with the
    decision-logic config); with user features the descriptor set is mined
    over those features only while conditions may use any feature.
    """
    if nd_cfg.user_features is None:
        shared_list = mine(ds, dl_cfg)
        return CandidateDomain(ds, shared_list, shared_list,
                               all_labels=all_labels, shared=True)
    descriptors = mine(ds, nd_cfg)
    conditions = mine(ds, dl_cfg)
    return CandidateDomain(ds, descriptors, conditions, all_labels=all_labels)
