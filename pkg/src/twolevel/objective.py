"""The weighted reward objective over candidate rule sets, with exact arithmetic.

Five terms are combined: predicate-count reward, descriptor/condition feature
separation, rule-overlap reward, coverage, and agreement with the black box.
The first four penalties are subtracted from upper-bound constants computed
from the candidate domain so every term is a non-negative integer; weights are
folded into one integer scale (floats are exact binary rationals), so values,
comparisons and deltas are exact and deterministic.

Constraints: at most `max_rules` rules, conjunction widths at most `max_width`
(also enforced by prefiltering the ground set) and at most `max_descriptors`
distinct descriptors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .data import Dataset, popcount
from .decision_set import Rule
from .errors import SchemaError
from .mining import CandidateDomain

VIOLATION_ORDER = ("size", "maxwidth", "numdsets")


@dataclass(frozen=True)
class ObjectiveConfig:
    weights: tuple = (0.2, 0.2, 0.2, 0.2, 0.2)
    max_rules: int = 10          # budget on rule count
    max_width: int = 5           # budget on any conjunction width
    max_descriptors: int = 4     # budget on distinct descriptors
    delta: float = 0.01          # local-search improvement slack
    normalize: bool = True       # divide each term by its upper bound
    active_constraints: int = 2  # 2 (size, numdsets) or 3 (adds width)

    def __post_init__(self):
        if len(self.weights) != 5 or any(w < 0 for w in self.weights):
            raise SchemaError("need 5 non-negative weights")
        # zero rule budget is allowed here so oracles can enumerate the trivial
        # case; user-facing entry points require >= 1
        if self.max_rules < 0 or min(self.max_width, self.max_descriptors) < 1:
            raise SchemaError("constraint budgets out of range")
        if self.delta <= 0:
            raise SchemaError("delta must be positive")
        if self.active_constraints not in (2, 3):
            raise SchemaError("active_constraints must be 2 or 3")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def to_json_dict(self) -> dict:
        return {
            "lambda": list(self.weights),
            "eps": [self.max_rules, self.max_width, self.max_descriptors],
            "delta": self.delta,
            "normalize": self.normalize,
            "k": self.active_constraints,
        }

    @classmethod
    def from_json(cls, text: str) -> "ObjectiveConfig":
        raw = json.loads(text)
        eps = raw.get("eps", [10, 5, 4])
        return cls(
            weights=tuple(raw.get("lambda", (0.2,) * 5)),
            max_rules=int(eps[0]), max_width=int(eps[1]), max_descriptors=int(eps[2]),
            delta=float(raw.get("delta", 0.01)),
            normalize=bool(raw.get("normalize", True)),
            active_constraints=int(raw.get("k", 2)),
        )


RAW_WEIGHTS = ObjectiveConfig(weights=(1, 1, 1, 1, 1), normalize=False)


@dataclass(frozen=True)
class BoundConstants:
    """Exact upper-bound constants; integer arithmetic is unbounded here."""

    numpreds_bound: int        # 2 * w_max * |ND| * |DL|
    featureoverlap_bound: int  # w_max * |ND| * |DL|
    ruleoverlap_bound: int     # n * (|ND| * |DL|)^2
    disagreement_bound: int    # n * |ND| * |DL|
    w_max: int
    nd_size: int
    dl_size: int
    n_instances: int


def bounds(domain: CandidateDomain, ds: Dataset) -> BoundConstants:
    nd, dl, w = len(domain.descriptors), len(domain.conditions), domain.w_max
    pairs = nd * dl
    return BoundConstants(
        numpreds_bound=2 * w * pairs,
        featureoverlap_bound=w * pairs,
        ruleoverlap_bound=ds.n * pairs * pairs,
        disagreement_bound=ds.n * pairs,
        w_max=w,
        nd_size=nd,
        dl_size=dl,
        n_instances=ds.n,
    )


class Objective:
    """Evaluator over element ids of a domain, prefiltered by max_width."""

    def __init__(self, domain: CandidateDomain, ds: Dataset, cfg: ObjectiveConfig):
        self.domain = domain
        self.ds = ds
        self.cfg = cfg
        self.bounds = bounds(domain, ds)
        b = self.bounds
        divisors = ((b.numpreds_bound, b.featureoverlap_bound, b.ruleoverlap_bound,
                     b.n_instances, b.disagreement_bound)
                    if cfg.normalize else (1, 1, 1, 1, 1))
        fracs = [Fraction(w) / d for w, d in zip(cfg.weights, divisors)]
        self.scale = math.lcm(*(f.denominator for f in fracs))
        self.w = [int(f * self.scale) for f in fracs]
        w1, w2, w3, _, w5 = self.w
        self.const = (w1 * b.numpreds_bound + w2 * b.featureoverlap_bound
                      + w3 * b.ruleoverlap_bound + w5 * b.disagreement_bound)
        self.elements = domain.elements
        # modular contribution of each element (everything except overlap/cover)
        self.modular = [-(w1 * e.numpreds + w2 * e.featureoverlap + w5 * e.disagree)
                        for e in self.elements]
        self.active_ids = [i for i, e in enumerate(self.elements)
                           if e.max_width <= cfg.max_width]
        self._overlap_cache: dict[tuple[int, int], int] = {}

    def overlap(self, a: int, b: int) -> int:
        """Instances covered by both element bodies (cached popcount)."""
        key = (a, b) if a < b else (b, a)
        cached = self._overlap_cache.get(key)
        if cached is None:
            cached = popcount(self.elements[a].body_bits & self.elements[b].body_bits)
            self._overlap_cache[key] = cached
        return cached

    def ruleoverlap(self, ids: Sequence[int]) -> int:
        ids = list(ids)
        total = 0
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                total += 2 * self.overlap(a, b)
        return total

    def cover_bits(self, ids: Iterable[int]) -> int:
        union = 0
        for e in ids:
            union |= self.elements[e].body_bits
        return union

    def value_scaled(self, ids: Sequence[int]) -> int:
        v = self.const + sum(self.modular[e] for e in ids)
        v -= self.w[2] * self.ruleoverlap(ids)
        v += self.w[3] * popcount(self.cover_bits(ids))
        return v

    def value(self, ids: Sequence[int]) -> Fraction:
        return Fraction(self.value_scaled(ids), self.scale)

    def feasible(self, ids: Sequence[int]) -> tuple[bool, str | None]:
        ids = list(ids)
        if len(ids) > self.cfg.max_rules:
            return False, "size"
        if ids and max(self.elements[e].max_width for e in ids) > self.cfg.max_width:
            return False, "maxwidth"
        if len({self.elements[e].descriptor_idx for e in ids}) > self.cfg.max_descriptors:
            return False, "numdsets"
        return True, None

    def rules_for(self, ids: Iterable[int]) -> list[Rule]:
        out = []
        for e in ids:
            el = self.elements[e]
            out.append(Rule(self.domain.descriptors[el.descriptor_idx],
                            self.domain.conditions[el.condition_idx], el.label))
        return out


def value(element_ids: Sequence[int], domain: CandidateDomain, ds: Dataset,
          cfg: ObjectiveConfig) -> Fraction:
    return Objective(domain, ds, cfg).value(element_ids)


def feasible(rules: Sequence[Rule], cfg: ObjectiveConfig) -> tuple[bool, str | None]:
    """Check the three budgets on a plain rule list; reports the first violated."""
    if len(rules) > cfg.max_rules:
        return False, "size"
    widths = [max(r.descriptor.width, r.condition.width) for r in rules]
    if widths and max(widths) > cfg.max_width:
        return False, "maxwidth"
    if len({r.descriptor for r in rules}) > cfg.max_descriptors:
        return False, "numdsets"
    return True, None


def delta_value(element_ids: Sequence[int], add: int | None, remove: Iterable[int],
                domain: CandidateDomain, ds: Dataset, cfg: ObjectiveConfig) -> Fraction:
    """Exact value change of removing `remove` and adding `add`."""
    current = list(element_ids)
    remove = set(remove)
    if not remove <= set(current):
        raise ValueError("remove set must be a subset of the current rules")
    after = [e for e in current if e not in remove]
    if add is not None:
        if add in after:
            raise ValueError("element already present")
        after.append(add)
    obj = Objective(domain, ds, cfg)
    return Fraction(obj.value_scaled(after) - obj.value_scaled(current), obj.scale)
