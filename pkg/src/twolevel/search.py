"""Approximate local search for the rule-set objective, plus a brute-force oracle.

The procedure runs `active_constraints + 1` rounds. Each round seeds its
solution with the best single element of the remaining ground set, then
repeatedly applies the best qualifying move until none qualifies or the move
cap is hit:

- delete: drop one rule;
- exchange: add one outside element and drop a removal set of up to
  `active_constraints` rules (the empty removal set gives pure insertion),
  provided the result stays feasible.

A move qualifies when it lifts the value by a factor of at least
(1 + delta / n^4), n being the round's ground-set size; the comparison is done
in exact integer arithmetic, so accepted moves strictly increase the value.
After a round its solution is removed from the ground set. The best round
wins. Scans are best-improvement over all moves with deterministic
tie-breaking (smallest move key), so results are reproducible regardless of
scan order; an upper-bound prune skips moves that provably cannot beat the
best one found, without affecting which move is chosen.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Sequence

from .data import popcount
from .decision_set import Rule
from .errors import SearchSpaceError
from .mining import CandidateDomain
from .objective import Objective, ObjectiveConfig
from .data import Dataset


@dataclass(frozen=True)
class SearchLimits:
    max_moves_per_round: int = 500
    seed: int | None = None     # recorded for reproducibility bookkeeping
    debug: bool = False         # cross-check every move delta against a rebuild


@dataclass
class MoveRecord:
    round_index: int
    op: str                     # "delete" | "exchange"
    add: int | None
    remove: tuple[int, ...]
    delta: Fraction
    accepted: bool

    def to_json_dict(self) -> dict:
        return {"round": self.round_index, "op": self.op, "add": self.add,
                "remove": list(self.remove), "delta": float(self.delta)}


@dataclass
class SearchResult:
    element_ids: list[int]
    rules: list[Rule]
    value: Fraction
    round_values: list[Fraction]
    iterations: list[int]
    wall_time: float
    move_log: list[MoveRecord] = field(default_factory=list)
    empty_ground_set: bool = False


class _RoundState:
    """Mutable solution state for one round; rebuilt after every accepted move."""

    def __init__(self, obj: Objective):
        self.obj = obj
        self.ids: list[int] = []
        self.union = 0
        self.value = obj.value_scaled([])
        self.partner_overlap: dict[int, int] = {}   # id -> sum of overlaps with others
        self.exactly: list[int] = []                # masks: covered exactly 1..4 times

    def rebuild(self, ids: Sequence[int]) -> None:
        obj = self.obj
        self.ids = sorted(ids)
        self.value = obj.value_scaled(self.ids)
        self.union = obj.cover_bits(self.ids)
        self.partner_overlap = {
            e: sum(obj.overlap(e, o) for o in self.ids if o != e) for e in self.ids}
        at_least = [0, 0, 0, 0, 0]   # covered >= 1..5 times
        for e in self.ids:
            b = obj.elements[e].body_bits
            for level in range(4, 0, -1):
                at_least[level] |= at_least[level - 1] & b
            at_least[0] |= b
        self.exactly = [at_least[j] & ~at_least[j + 1] for j in range(4)]

    def freed_bits(self, removal: Sequence[int]) -> int:
        """Instances no longer covered once `removal` is dropped.

        An instance is freed when every rule covering it belongs to the
        removal set, i.e. its overall coverage count equals its coverage
        count within the removal set.
        """
        if not removal:
            return 0
        r = len(removal)
        local = [0] * (r + 1)    # covered >= 1..r+1 times within the removal set
        for e in removal:
            b = self.obj.elements[e].body_bits
            for level in range(r - 1, 0, -1):
                local[level] |= local[level - 1] & b
            local[0] |= b
        freed = 0
        for j in range(r):
            within_exactly_j = local[j] & ~local[j + 1]
            freed |= self.exactly[j] & within_exactly_j
        return freed


@dataclass(frozen=True)
class _Move:
    op: str
    add: int | None
    remove: tuple[int, ...]
    new_value: int

    def key(self):
        return (0 if self.op == "delete" else 1,
                -1 if self.add is None else self.add, self.remove)


def _best_move(state: _RoundState, pool: list[int], k: int) -> _Move | None:
    """Exact best-improvement move, or None when the solution is empty-handed.

    Returns the move with maximum resulting value (ties: smallest key); the
    caller decides whether it clears the acceptance threshold.
    """
    obj = state.obj
    cfg = obj.cfg
    ids = state.ids
    in_solution = set(ids)
    w3, w4 = obj.w[2], obj.w[3]
    best: _Move | None = None

    def consider(move: _Move):
        nonlocal best
        if best is None or move.new_value > best.new_value or (
                move.new_value == best.new_value and move.key() < best.key()):
            best = move

    # deletes: exact evaluation, |S| of them
    for e in ids:
        freed = obj.elements[e].body_bits & state.exactly[0]
        new_v = (state.value - obj.modular[e]
                 + 2 * w3 * state.partner_overlap[e] - w4 * popcount(freed))
        consider(_Move("delete", None, (e,), new_v))

    descriptor_counts: dict[int, int] = {}
    for e in ids:
        d = obj.elements[e].descriptor_idx
        descriptor_counts[d] = descriptor_counts.get(d, 0) + 1

    # candidate static data: modular weight and fresh-coverage cap
    not_union = ~state.union
    static = []
    for d in pool:
        if d in in_solution:
            continue
        gaincap = popcount(obj.elements[d].body_bits & not_union)
        static.append((obj.modular[d] + w4 * gaincap, d, gaincap))
    static.sort(key=lambda t: (-t[0], t[1]))

    removal_sets = [()]
    for r in range(1, min(k, len(ids)) + 1):
        removal_sets.extend(combinations(ids, r))

    ov_cache: dict[int, dict[int, int]] = {}

    for removal in removal_sets:
        if len(ids) - len(removal) + 1 > cfg.max_rules:
            continue
        removed_set = set(removal)
        # value released by dropping the removal set (overlap bonus, modular refund);
        # pairs inside the removal set are counted once in each member's partner sum
        refund = -sum(obj.modular[e] for e in removal)
        pair_within = sum(obj.overlap(a, b) for a, b in combinations(removal, 2))
        overlap_gain = 2 * w3 * (sum(state.partner_overlap[e] for e in removal)
                                 - pair_within)
        freed = state.freed_bits(removal)
        freed_cnt = popcount(freed)
        gain_removal = refund + overlap_gain

        new_desc = dict(descriptor_counts)
        for e in removal:
            d = obj.elements[e].descriptor_idx
            new_desc[d] -= 1
            if not new_desc[d]:
                del new_desc[d]

        for static_gain, d, gaincap in static:
            if best is not None:
                # re-covering freed rows never beats fresh coverage, so
                # static_gain + gain_removal bounds the exact delta from above
                if static_gain + gain_removal < best.new_value - state.value:
                    break   # sorted descending: nothing below can win
            el = obj.elements[d]
            desc_count = len(new_desc) + (0 if el.descriptor_idx in new_desc else 1)
            if desc_count > cfg.max_descriptors:
                continue
            ov_d = ov_cache.get(d)
            if ov_d is None:
                ov_d = {o: obj.overlap(d, o) for o in ids}
                ov_cache[d] = ov_d
            added_overlap = sum(v for o, v in ov_d.items() if o not in removed_set)
            cover_gain = popcount(el.body_bits & (not_union | freed)) - freed_cnt
            delta = (obj.modular[d] + gain_removal
                     - 2 * w3 * added_overlap + w4 * cover_gain)
            consider(_Move("exchange", d, removal, state.value + delta))

    return best


def optimize(domain: CandidateDomain, ds: Dataset, cfg: ObjectiveConfig,
             limits: SearchLimits | None = None) -> SearchResult:
    """Run the multi-round local search and return the best round's solution."""
    limits = limits or SearchLimits()
    started = time.perf_counter()
    obj = Objective(domain, ds, cfg)
    k = cfg.active_constraints
    remaining = sorted(obj.active_ids)

    delta_frac = Fraction(cfg.delta)
    move_log: list[MoveRecord] = []
    round_solutions: list[list[int]] = []
    round_values: list[int] = []
    iterations: list[int] = []

    for round_index in range(1, k + 2):
        pool = list(remaining)
        n = len(pool)
        state = _RoundState(obj)
        moves = 0
        if pool:
            # seed with the best single element (ties: smallest id)
            seed = max(pool, key=lambda e: (obj.value_scaled([e]), -e))
            state.rebuild([seed])
            # threshold factor 1 + delta/n^4 as an exact rational
            thr_num = delta_frac.numerator
            thr_den = delta_frac.denominator * n ** 4
            while moves < limits.max_moves_per_round:
                move = _best_move(state, pool, k)
                if move is None:
                    break
                # exact rational comparison; the strict clause only matters when
                # the current value is zero (all-zero weights)
                accepted = (move.new_value * thr_den >= state.value * (thr_den + thr_num)
                            and move.new_value > state.value)
                record = MoveRecord(round_index, move.op, move.add, move.remove,
                                    Fraction(move.new_value - state.value, obj.scale),
                                    accepted)
                if not accepted:
                    move_log.append(record)
                    break
                new_ids = [e for e in state.ids if e not in set(move.remove)]
                if move.add is not None:
                    new_ids.append(move.add)
                if limits.debug:
                    assert obj.value_scaled(new_ids) == move.new_value, \
                        "scan delta disagrees with recomputation"
                state.rebuild(new_ids)
                ok, violated = obj.feasible(state.ids)
                assert ok, f"move produced infeasible solution ({violated})"
                move_log.append(record)
                moves += 1
        round_solutions.append(list(state.ids))
        round_values.append(state.value)
        iterations.append(moves)
        remaining = [e for e in remaining if e not in set(state.ids)]

    # ties favor the smaller solution, then the earlier round
    best_round = max(range(len(round_values)),
                     key=lambda i: (round_values[i], -len(round_solutions[i]), -i))
    best_ids = sorted(round_solutions[best_round])
    return SearchResult(
        element_ids=best_ids,
        rules=obj.rules_for(best_ids),
        value=Fraction(round_values[best_round], obj.scale),
        round_values=[Fraction(v, obj.scale) for v in round_values],
        iterations=iterations,
        wall_time=time.perf_counter() - started,
        move_log=move_log,
        empty_ground_set=not obj.active_ids,
    )


def feasible_subset_count_bound(n_elements: int, max_rules: int) -> int:
    return sum(comb(n_elements, m) for m in range(min(max_rules, n_elements) + 1))


def brute_force(domain: CandidateDomain, ds: Dataset, cfg: ObjectiveConfig,
                guard: int = 10 ** 6) -> SearchResult:
    """Exhaustive exact optimum over all feasible subsets; refuses huge spaces."""
    obj = Objective(domain, ds, cfg)
    ids = sorted(obj.active_ids)
    bound = feasible_subset_count_bound(len(ids), cfg.max_rules)
    if bound > guard:
        raise SearchSpaceError(
            f"about {bound} feasible subsets exceed the {guard} enumeration guard")
    started = time.perf_counter()
    best_ids: tuple[int, ...] = ()
    best_value = obj.value_scaled([])
    for m in range(1, min(cfg.max_rules, len(ids)) + 1):
        for subset in combinations(ids, m):
            ok, _ = obj.feasible(subset)
            if not ok:
                continue
            v = obj.value_scaled(subset)
            if v > best_value:   # ties keep the lexicographically first subset
                best_value = v
                best_ids = subset
    chosen = sorted(best_ids)
    return SearchResult(
        element_ids=chosen,
        rules=obj.rules_for(chosen),
        value=Fraction(best_value, obj.scale),
        round_values=[Fraction(best_value, obj.scale)],
        iterations=[0],
        wall_time=time.perf_counter() - started,
    )


def export_move_log(result: SearchResult, path: str) -> None:
    import json
    with open(path, "w", encoding="utf-8") as fh:
        for record in result.move_log:
            fh.write(json.dumps(record.to_json_dict()) + "\n")
