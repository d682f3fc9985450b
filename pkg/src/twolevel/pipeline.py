"""End-to-end orchestration: label, mine, optimize, fit, report.

`explain` produces the canonical explanation document; `sweep` repeats it
along one parameter axis and emits a CSV. The explanation JSON layout is
fixed (field order as documented, floats printed with six decimal digits), so
identical requests with identical seeds serialize byte-identically.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .data import Conjunction, Dataset, Predicate, popcount
from .decision_set import (Rule, TwoLevelDecisionSet, fit_default_and_ties,
                           usage_counts)
from .errors import SchemaError
from .metrics import report
from .mining import CandidateDomain, MinerConfig, build_domain
from .objective import ObjectiveConfig
from .oracle import MODE_COLUMN, OracleSource, label_all
from .search import SearchLimits, optimize

SWEEP_AXES = ("eps1", "eps2", "eps3", "min_support")
SWEEP_HEADER = ("axis", "agreement_rate", "size", "avg_numpreds", "numdsets",
                "cover_fraction", "ruleoverlap_fraction", "error")


@dataclass(frozen=True)
class ExplainRequest:
    dataset: Dataset
    oracle: OracleSource | None = None
    miner: MinerConfig = field(default_factory=MinerConfig)
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    user_features: frozenset | None = None
    seed: int | None = None
    all_labels: bool = False
    max_moves_per_round: int = 500

    def __post_init__(self):
        if self.user_features is not None:
            unknown = frozenset(self.user_features) - set(self.dataset.feature_names())
            if unknown:
                raise SchemaError(f"user features not in schema: {sorted(unknown)}")
            object.__setattr__(self, "user_features", frozenset(self.user_features))
        if self.objective.max_rules < 1:
            raise SchemaError("rule budget must be >= 1")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    request: ExplainRequest

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise SchemaError(f"axis must be one of {SWEEP_AXES}")
        if len(self.values) < 1:
            raise SchemaError("sweep needs at least one axis value")
        if list(self.values) != sorted(self.values):
            raise SchemaError("axis values must be ascending")


def _resolve_labels(req: ExplainRequest) -> Dataset:
    ds = req.dataset
    if req.oracle is None or req.oracle.mode == MODE_COLUMN:
        return ds
    labels = label_all(list(ds.rows), req.oracle)
    return ds.with_labels(labels)


def _domain_for(req: ExplainRequest, ds: Dataset, cache: dict | None) -> CandidateDomain:
    key = (req.miner.min_support, req.miner.max_width, req.miner.max_candidates,
           req.user_features, req.all_labels, id(ds), ds.labels)
    if cache is not None and key in cache:
        return cache[key]
    dl_cfg = req.miner
    nd_cfg = dl_cfg.restricted(req.user_features) if req.user_features is not None else dl_cfg
    domain = build_domain(ds, nd_cfg, dl_cfg, all_labels=req.all_labels)
    if cache is not None:
        cache[key] = domain
    return domain


def explain(req: ExplainRequest, domain_cache: dict | None = None) -> dict:
    """Run the full pipeline and return the explanation document."""
    ds = _resolve_labels(req)
    domain = _domain_for(req, ds, domain_cache)
    result = optimize(domain, ds, req.objective,
                      SearchLimits(max_moves_per_round=req.max_moves_per_round,
                                   seed=req.seed))
    model = fit_default_and_ties(result.rules, ds)
    rep = report(model, ds)
    usage = usage_counts(model, ds)

    rules_json = []
    for rule, rate in zip(model.rules, model.agreement_rates):
        body = rule.body_bits(ds)
        rules_json.append({
            "q": [_predicate_json(p) for p in rule.descriptor.sorted_predicates()],
            "s": [_predicate_json(p) for p in rule.condition.sorted_predicates()],
            "c": rule.label,
            "cover": popcount(body),
            "agreement": rate,
        })

    return {
        "rules": rules_json,
        "default_label": model.default_label,
        "metrics": {
            "disagreement": rep.disagreement,
            "ruleoverlap": rep.ruleoverlap,
            "cover": rep.cover,
            "size": rep.size,
            "maxwidth": rep.maxwidth,
            "numpreds": rep.numpreds,
            "numdsets": rep.numdsets,
            "featureoverlap": rep.featureoverlap,
            "agreement_rate": rep.agreement_rate,
            "cover_fraction": rep.cover_fraction,
            "ruleoverlap_fraction": rep.ruleoverlap_fraction,
        },
        "params": {
            "lambda": list(req.objective.weights),
            "eps": [req.objective.max_rules, req.objective.max_width,
                    req.objective.max_descriptors],
            "delta": req.objective.delta,
            "normalize": req.objective.normalize,
            "k": req.objective.active_constraints,
            "min_support": req.miner.min_support,
            "mining_max_width": req.miner.max_width,
            "max_candidates": req.miner.max_candidates,
            "all_labels": req.all_labels,
            "features": sorted(req.user_features) if req.user_features is not None else None,
            "seed": req.seed,
        },
        "search": {
            "best_value": float(result.value),
            "round_values": [float(v) for v in result.round_values],
            "moves": sum(result.iterations),
            "default_used": usage["default"],
            "tiebreak_used": usage["tiebreak"],
            "empty_ground_set": result.empty_ground_set,
        },
    }


def _predicate_json(p: Predicate) -> dict:
    return {"feature": p.feature, "op": p.op, "value": p.value}


def to_canonical_json(doc) -> str:
    """Serialize with fixed field order and 6-decimal floats."""
    out = io.StringIO()
    _write(doc, out)
    return out.getvalue()


def _write(node, out) -> None:
    import json as _json

    if isinstance(node, dict):
        out.write("{")
        for i, (key, value) in enumerate(node.items()):
            if i:
                out.write(", ")
            out.write(_json.dumps(str(key)))
            out.write(": ")
            _write(value, out)
        out.write("}")
    elif isinstance(node, (list, tuple)):
        out.write("[")
        for i, value in enumerate(node):
            if i:
                out.write(", ")
            _write(value, out)
        out.write("]")
    elif isinstance(node, bool) or node is None:
        out.write("true" if node is True else "false" if node is False else "null")
    elif isinstance(node, float):
        out.write(f"{node + 0.0:.6f}")   # +0.0 normalizes negative zero
    elif isinstance(node, int):
        out.write(str(node))
    else:
        out.write(_json.dumps(str(node)))


def model_from_explanation(doc: Mapping) -> TwoLevelDecisionSet:
    """Rebuild the fitted decision set from an explanation document."""
    rules = []
    rates = []
    for entry in doc["rules"]:
        q = Conjunction([_predicate_from_json(p) for p in entry["q"]])
        s = Conjunction([_predicate_from_json(p) for p in entry["s"]])
        rules.append(Rule(q, s, entry["c"]))
        rates.append(float(entry["agreement"]))
    return TwoLevelDecisionSet(rules, doc["default_label"], rates)


def _predicate_from_json(p: Mapping) -> Predicate:
    value = p["value"] if p["op"] == "==" else float(p["value"])
    return Predicate(p["feature"], p["op"], value)


def _request_for_point(req: ExplainRequest, axis: str, value) -> ExplainRequest:
    if axis == "eps1":
        return replace(req, objective=replace(req.objective, max_rules=int(value)))
    if axis == "eps2":
        return replace(req, objective=replace(req.objective, max_width=int(value)))
    if axis == "eps3":
        return replace(req, objective=replace(req.objective, max_descriptors=int(value)))
    return replace(req, miner=replace(req.miner, min_support=float(value)))


def sweep(spec: SweepSpec) -> tuple[list[dict], str]:
    """One explanation per axis value; failures become row-level errors."""
    cache: dict = {}
    rows = []
    for axis_value in spec.values:
        row = {"axis": axis_value}
        try:
            doc = explain(_request_for_point(spec.request, spec.axis, axis_value), cache)
            m = doc["metrics"]
            row.update(
                agreement_rate=m["agreement_rate"],
                size=m["size"],
                avg_numpreds=(m["numpreds"] / m["size"]) if m["size"] else 0.0,
                numdsets=m["numdsets"],
                cover_fraction=m["cover_fraction"],
                ruleoverlap_fraction=m["ruleoverlap_fraction"],
                error="",
            )
        except Exception as exc:   # per-point failures must not kill the sweep
            row.update(agreement_rate="", size="", avg_numpreds="", numdsets="",
                       cover_fraction="", ruleoverlap_fraction="",
                       error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows, sweep_csv(rows)


def sweep_csv(rows: Sequence[Mapping]) -> str:
    import csv as _csv

    out = io.StringIO()
    writer = _csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow([_csv_cell(row[k]) for k in SWEEP_HEADER])
    return out.getvalue()


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)
