"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s`. Every tolerance and time
budget is asserted here; the theorem checks use all-ones weights in raw
(unnormalized) mode so comparisons are exact integer arithmetic.
"""

import math
import random
import time
from fractions import Fraction
from itertools import combinations

from twolevel.cli import cli_main
from twolevel.data import popcount
from twolevel.decision_set import fit_default_and_ties
from twolevel.metrics import (fidelity_metrics, interpretability_metrics,
                              unambiguity_metrics)
from twolevel.mining import CandidateDomain, MinerConfig, build_domain, mine
from twolevel.objective import RAW_WEIGHTS, Objective, ObjectiveConfig
from twolevel.pipeline import ExplainRequest, SweepSpec, explain, sweep
from twolevel.planted import PlantedSpec, generate, write_csv
from twolevel.search import SearchLimits, brute_force, optimize

from conftest import random_binary_dataset, random_rules, write_toy8
from test_metrics import all_eight, naive_metrics
from test_mining import enumerate_frequent

PLANTED = PlantedSpec(n_instances=2000, n_features=10, n_descriptors=3,
                      rules_per_descriptor=2, seed=7)
PLANTED_MINER = MinerConfig(min_support=0.05, max_width=2, max_candidates=200)
PLANTED_OBJECTIVE = ObjectiveConfig(weights=(1, 1, 1, 1, 5), normalize=False,
                                    max_rules=10, max_width=5, max_descriptors=4)


def _report(name: str, elapsed: float, detail: str = ""):
    extra = f" ({detail})" if detail else ""
    print(f"\nACCEPTANCE {name}: PASS in {elapsed:.1f}s{extra}")


def test_metric_oracle_equivalence():
    started = time.perf_counter()
    rng = random.Random(2024)
    trials = 0
    while trials < 1000:
        ds = random_binary_dataset(rng, rng.randint(4, 64), rng.randint(2, 5))
        rules = random_rules(rng, ds, rng.randint(0, 6))
        assert all_eight(rules, ds) == naive_metrics(rules, ds), f"trial {trials}"
        trials += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 10, f"metric oracle equivalence took {elapsed:.1f}s"
    _report("metric-oracle-equivalence", elapsed, f"{trials} instances, exact")


def _theorem_domains(rng, count):
    out = []
    for _ in range(count):
        ds = random_binary_dataset(rng, rng.randint(8, 32), rng.randint(2, 4))
        cfg = MinerConfig(min_support=0.1, max_width=2, max_candidates=8)
        dom = build_domain(ds, cfg, cfg)
        out.append((ds, dom, Objective(dom, ds, RAW_WEIGHTS)))
    return out


def test_theorem_suite():
    started = time.perf_counter()
    rng = random.Random(7)
    domains = _theorem_domains(rng, 20)

    # non-negativity over uniform random subsets of the ground set
    checked = 0
    while checked < 10_000:
        _, dom, obj = domains[checked % len(domains)]
        ids = [i for i in range(len(dom)) if rng.random() < 0.5]
        assert obj.value_scaled(ids) >= 0
        checked += 1

    # submodularity: marginal gains shrink as the base set grows, exactly
    checked = 0
    while checked < 10_000:
        _, dom, obj = domains[checked % len(domains)]
        universe = list(range(len(dom)))
        b_set = rng.sample(universe, rng.randint(1, len(universe)))
        a_set = [e for e in b_set if rng.random() < 0.5]
        rest = [e for e in universe if e not in b_set]
        if not rest:
            continue
        e = rng.choice(rest)
        gain_a = obj.value_scaled(a_set + [e]) - obj.value_scaled(a_set)
        gain_b = obj.value_scaled(b_set + [e]) - obj.value_scaled(b_set)
        assert gain_a >= gain_b
        checked += 1

    # non-monotonicity witness: some superset is strictly worse
    witness = False
    for _, dom, obj in domains:
        for e in range(len(dom)):
            if obj.value_scaled([]) > obj.value_scaled([e]):
                witness = True
                break
        if witness:
            break
    assert witness, "no non-monotonicity witness found"

    # matroid exchange, exhaustive on ground sets of <= 10 elements
    size_violations = []
    findings = []
    for ds, dom, _ in domains[:6]:
        ids = list(range(min(len(dom), 10)))
        size_cfg = ObjectiveConfig(weights=(1,) * 5, max_rules=3, max_width=5,
                                   max_descriptors=len(ids) + 1, normalize=False)
        both_cfg = ObjectiveConfig(weights=(1,) * 5, max_rules=3, max_width=5,
                                   max_descriptors=1, normalize=False)
        for cfg, sink in ((size_cfg, size_violations), (both_cfg, findings)):
            obj = Objective(dom, ds, cfg)
            feasible_sets = [s for m in range(4) for s in combinations(ids, m)
                             if obj.feasible(s)[0]]
            for a in feasible_sets:
                for b in feasible_sets:
                    if len(a) >= len(b):
                        continue
                    if not any(obj.feasible(a + (e,))[0] for e in set(b) - set(a)):
                        sink.append((a, b, cfg.max_descriptors))
    assert not size_violations, f"size budget is not a matroid: {size_violations[:3]}"
    # the descriptor-count budget fails the exchange property on some pairs;
    # these are findings to surface, not errors (the size budget alone passed)
    print(f"\n  numdsets exchange findings: {len(findings)} "
          f"(e.g. {findings[0] if findings else 'none'})")

    elapsed = time.perf_counter() - started
    assert elapsed < 60, f"theorem suite took {elapsed:.1f}s"
    _report("theorem-suite", elapsed,
            f"10k subsets, 10k triples, {len(findings)} numdsets findings")


def test_optimizer_vs_brute_force():
    started = time.perf_counter()
    rng = random.Random(77)
    hard_bound = Fraction(1, 5)
    near = 0
    total = 0
    while total < 50:
        ds = random_binary_dataset(rng, rng.randint(8, 32), rng.randint(2, 4))
        cfg = MinerConfig(min_support=0.1, max_width=1, max_candidates=4)
        try:
            candidates = mine(ds, cfg)
        except Exception:
            continue
        nd = candidates[:rng.randint(1, min(3, len(candidates)))]
        dl = candidates[:rng.randint(1, min(4, len(candidates)))]
        dom = CandidateDomain(ds, nd, dl)
        if len(dom) > 12:
            continue
        obj_cfg = ObjectiveConfig(weights=(1,) * 5, max_rules=rng.randint(1, 3),
                                  max_width=2, max_descriptors=rng.randint(1, 3),
                                  normalize=False)
        exact = brute_force(dom, ds, obj_cfg)
        found = optimize(dom, ds, obj_cfg, SearchLimits(debug=True))
        assert found.value >= hard_bound * exact.value, "1/5 bound violated"
        if found.value >= Fraction(95, 100) * exact.value:
            near += 1
        total += 1
    share = near / total
    assert share >= 0.9, f"only {share:.0%} of instances within 0.95 of optimum"
    elapsed = time.perf_counter() - started
    assert elapsed < 120, f"optimizer-vs-brute-force took {elapsed:.1f}s"
    _report("optimizer-vs-brute-force", elapsed,
            f"{total} domains, {share:.0%} within 0.95x of optimum")


def planted_request(ds):
    return ExplainRequest(dataset=ds, miner=PLANTED_MINER,
                          objective=PLANTED_OBJECTIVE, seed=0)


def test_planted_recovery():
    started = time.perf_counter()
    model, ds = generate(PLANTED)
    threshold = math.ceil(PLANTED_MINER.min_support * ds.n)
    for rule in model.rules:
        assert popcount(ds.coverage(rule.descriptor)) >= threshold
        assert popcount(ds.coverage(rule.condition)) >= threshold
        assert popcount(rule.body_bits(ds)) >= threshold
    doc = explain(planted_request(ds))
    m = doc["metrics"]
    assert m["agreement_rate"] >= 0.95, m
    assert m["cover_fraction"] >= 0.95, m
    assert m["ruleoverlap_fraction"] <= 0.02, m
    elapsed = time.perf_counter() - started
    assert elapsed < 300, f"planted recovery took {elapsed:.1f}s"
    _report("planted-recovery", elapsed,
            f"agreement {m['agreement_rate']:.3f}, cover {m['cover_fraction']:.3f}, "
            f"overlap {m['ruleoverlap_fraction']:.4f}")


def test_tradeoff_directionality(tmp_path):
    started = time.perf_counter()
    _, ds = generate(PLANTED)
    spec = SweepSpec("eps1", (1, 2, 4, 6, 8, 10), planted_request(ds))
    rows, csv_text = sweep(spec)
    out = tmp_path / "eps1_sweep.csv"
    out.write_text(csv_text, encoding="utf-8")
    assert out.exists() and csv_text.startswith("axis,agreement_rate,")
    rates = [row["agreement_rate"] for row in rows]
    assert all(isinstance(r, float) for r in rates), rows
    for previous, current in zip(rates, rates[1:]):
        assert current >= previous - 0.01, rates
    elapsed = time.perf_counter() - started
    assert elapsed < 600, f"trade-off sweep took {elapsed:.1f}s"
    _report("tradeoff-directionality", elapsed,
            "agreement " + " -> ".join(f"{r:.3f}" for r in rates))


def test_interactivity_restriction():
    started = time.perf_counter()
    rng = random.Random(5)
    _, ds = generate(PlantedSpec(n_instances=400, n_features=8, seed=11))
    names = ds.feature_names()
    for trial in range(20):
        u = frozenset(rng.sample(names, rng.randint(1, 3)))
        req = ExplainRequest(
            dataset=ds, miner=MinerConfig(min_support=0.05, max_width=2,
                                          max_candidates=80),
            objective=ObjectiveConfig(weights=(1, 1, 1, 1, 5), normalize=False,
                                      max_rules=6, max_width=4, max_descriptors=4),
            user_features=u, seed=trial)
        doc = explain(req)
        for entry in doc["rules"]:
            used = {p["feature"] for p in entry["q"]}
            assert used <= u, (trial, sorted(u), sorted(used))
    elapsed = time.perf_counter() - started
    assert elapsed < 300, f"interactivity restriction took {elapsed:.1f}s"
    _report("interactivity-restriction", elapsed, "20 random feature subsets, exact")


def test_determinism_byte_identical(tmp_path):
    started = time.perf_counter()
    data = write_toy8(tmp_path / "toy8.csv")
    outputs = []
    for name in ("first.json", "second.json"):
        out = tmp_path / name
        code = cli_main(["fit", "--data", data, "--label-col", "label",
                         "--eps", "4,2,3", "--lambda", "1,1,1,1,5",
                         "--normalize", "false", "--seed", "123",
                         "--out", str(out)])
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]

    _, planted_ds = generate(PlantedSpec(n_instances=300, n_features=8, seed=3))
    docs = set()
    for _ in range(2):
        from twolevel.pipeline import to_canonical_json
        req = ExplainRequest(dataset=planted_ds,
                             miner=MinerConfig(min_support=0.05, max_width=2),
                             objective=PLANTED_OBJECTIVE, seed=9)
        docs.add(to_canonical_json(explain(req)))
    assert len(docs) == 1
    elapsed = time.perf_counter() - started
    _report("determinism", elapsed, "byte-identical explanation JSON")


def test_apriori_oracle():
    started = time.perf_counter()
    rng = random.Random(404)
    for trial in range(100):
        ds = random_binary_dataset(rng, rng.randint(4, 64), rng.randint(2, 6))
        assert len(ds.coverage_index) <= 12
        cfg = MinerConfig(min_support=rng.choice([0.05, 0.1, 0.2, 0.35]),
                          max_width=rng.randint(1, 3), max_candidates=1000)
        try:
            got = mine(ds, cfg)
        except Exception:
            assert not enumerate_frequent(ds, cfg), f"trial {trial}"
            continue
        assert got == enumerate_frequent(ds, cfg), f"trial {trial}"
    elapsed = time.perf_counter() - started
    _report("apriori-oracle", elapsed, "100 datasets, exact itemset equality")
