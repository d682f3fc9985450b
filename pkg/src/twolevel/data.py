"""Tabular data model: feature schemas, predicates, conjunctions and datasets.

Instances are kept as raw CSV strings; numeric features additionally carry a
parsed float view. Coverage of a predicate over the dataset is a bitset stored
as a plain int (bit i == instance i satisfies the predicate), which keeps every
count exact and makes conjunction coverage a bitwise AND.
"""

from __future__ import annotations

import csv
import json
import statistics
import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptyDatasetError,
    MissingValueError,
    ParseError,
    SchemaError,
    UnsatisfiableConjunctionError,
)

CATEGORICAL = "categorical"
NUMERIC = "numeric"

OP_EQ = "=="
OP_GE = ">="
OP_LT = "<"


@dataclass(frozen=True)
class FeatureSchema:
    """One feature: its kind plus either category values or numeric cut points."""

    name: str
    kind: str
    values: tuple = ()        # category strings, for categorical features
    thresholds: tuple = ()    # ascending cut points, for numeric features

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise SchemaError(f"unknown feature kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not self.values:
                raise SchemaError(f"categorical feature {self.name!r} has no values")
            if len(set(self.values)) != len(self.values):
                raise SchemaError(f"duplicate category values for {self.name!r}")
        else:
            if not self.thresholds:
                raise SchemaError(f"numeric feature {self.name!r} has no cut points")
            if any(a >= b for a, b in zip(self.thresholds, self.thresholds[1:])):
                raise SchemaError(f"cut points for {self.name!r} not strictly ascending")


@dataclass(frozen=True)
class Predicate:
    """Atomic condition (feature, operator, value).

    `==` applies to categorical features (value is a category string);
    `>=` and `<` apply to numeric features (value is a float threshold).
    """

    feature: str
    op: str
    value: object

    def __post_init__(self):
        if self.op not in (OP_EQ, OP_GE, OP_LT):
            raise SchemaError(f"unknown operator {self.op!r}")
        if self.op == OP_EQ and not isinstance(self.value, str):
            raise SchemaError(f"== predicate on {self.feature!r} needs a string value")
        if self.op in (OP_GE, OP_LT) and not isinstance(self.value, (int, float)):
            raise SchemaError(f"{self.op} predicate on {self.feature!r} needs a numeric value")

    def sort_key(self):
        # value slot is homogeneous per (feature, op), so tuples always compare
        return (self.feature, self.op, str(self.value) if self.op == OP_EQ else float(self.value))

    def holds_on(self, raw_value: str) -> bool:
        """Evaluate against a raw cell value (string from CSV or user JSON)."""
        if self.op == OP_EQ:
            return str(raw_value) == self.value
        try:
            x = float(raw_value)
        except (TypeError, ValueError):
            return False
        return x >= self.value if self.op == OP_GE else x < self.value

    def render(self) -> str:
        v = self.value if self.op == OP_EQ else format(self.value, "g")
        return f"{self.feature} {self.op} {v}"


class Conjunction:
    """An ANDed set of predicates; rejects contradictions at construction."""

    __slots__ = ("predicates", "_key", "_hash")

    def __init__(self, predicates: Iterable[Predicate]):
        preds = frozenset(predicates)
        if not preds:
            raise UnsatisfiableConjunctionError("conjunction needs at least one predicate")
        _check_satisfiable(preds)
        object.__setattr__(self, "predicates", preds)
        object.__setattr__(self, "_key", tuple(sorted(p.sort_key() for p in preds)))
        object.__setattr__(self, "_hash", hash(self._key))

    @property
    def width(self) -> int:
        return len(self.predicates)

    @property
    def features(self) -> frozenset:
        return frozenset(p.feature for p in self.predicates)

    def sort_key(self):
        return self._key

    def sorted_predicates(self) -> list[Predicate]:
        return sorted(self.predicates, key=Predicate.sort_key)

    def holds_on(self, instance: Mapping[str, object]) -> bool:
        """Evaluate against an ad-hoc instance mapping feature -> raw value."""
        for p in self.predicates:
            if p.feature not in instance or not p.holds_on(instance[p.feature]):
                return False
        return True

    def render(self) -> str:
        return " AND ".join(p.render() for p in self.sorted_predicates())

    def __eq__(self, other):
        return isinstance(other, Conjunction) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Conjunction({self.render()})"


def _check_satisfiable(preds: frozenset) -> None:
    by_feature: dict[str, list[Predicate]] = {}
    for p in preds:
        by_feature.setdefault(p.feature, []).append(p)
    for name, plist in by_feature.items():
        eqs = [p.value for p in plist if p.op == OP_EQ]
        ges = [p.value for p in plist if p.op == OP_GE]
        lts = [p.value for p in plist if p.op == OP_LT]
        if eqs and (ges or lts):
            raise UnsatisfiableConjunctionError(f"mixed == and range operators on {name!r}")
        if len(set(eqs)) > 1:
            raise UnsatisfiableConjunctionError(f"{name!r} equals two different values")
        if ges and lts and max(ges) >= min(lts):
            raise UnsatisfiableConjunctionError(
                f"{name!r} >= {max(ges)} contradicts {name!r} < {min(lts)}"
            )


@dataclass(frozen=True)
class BinConfig:
    """Quantile binning for numeric features, with optional explicit cuts."""

    quantiles: int = 4
    per_feature_overrides: Mapping[str, Sequence[float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.quantiles < 2:
            raise SchemaError("quantiles must be >= 2")

    @classmethod
    def from_json(cls, text: str) -> "BinConfig":
        raw = json.loads(text)
        return cls(
            quantiles=int(raw.get("quantiles", 4)),
            per_feature_overrides={k: [float(x) for x in v]
                                   for k, v in raw.get("per_feature_overrides", {}).items()},
        )


class Dataset:
    """Immutable table of instances with black-box labels and coverage bitsets."""

    def __init__(self, schema: Sequence[FeatureSchema], rows: Sequence[Mapping[str, str]],
                 labels: Sequence[str], label_column: str = "label"):
        if not rows:
            raise EmptyDatasetError("dataset has no instances")
        if len(labels) != len(rows):
            raise SchemaError(f"{len(labels)} labels for {len(rows)} rows")
        names = [f.name for f in schema]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names")
        self.schema = tuple(schema)
        self.rows = tuple(dict(r) for r in rows)
        self.labels = tuple(str(c) for c in labels)
        self.label_column = label_column
        self.n = len(self.rows)
        self.label_set = tuple(sorted(set(self.labels)))
        self.label_counts = {c: self.labels.count(c) for c in self.label_set}
        # bitset of instances carrying each label
        self.label_masks = {c: _mask([i for i, y in enumerate(self.labels) if y == c])
                            for c in self.label_set}
        self.all_mask = (1 << self.n) - 1
        self.coverage_index: dict[Predicate, int] = {}
        for p in self.predicates():
            bits = 0
            for i, row in enumerate(self.rows):
                if p.holds_on(row[p.feature]):
                    bits |= 1 << i
            self.coverage_index[p] = bits
        self._conj_cache: dict[Conjunction, int] = {}
        self._cache_lock = threading.Lock()

    def predicates(self) -> list[Predicate]:
        out = []
        for f in self.schema:
            if f.kind == CATEGORICAL:
                out.extend(Predicate(f.name, OP_EQ, v) for v in f.values)
            else:
                for cut in f.thresholds:
                    out.append(Predicate(f.name, OP_LT, cut))
                    out.append(Predicate(f.name, OP_GE, cut))
        return out

    def feature_names(self) -> list[str]:
        return [f.name for f in self.schema]

    def satisfies(self, conj: Conjunction, index: int) -> bool:
        if not 0 <= index < self.n:
            raise IndexError(f"instance index {index} out of range 0..{self.n - 1}")
        return bool(self.coverage(conj) >> index & 1)

    def coverage(self, conj: Conjunction) -> int:
        """Bitset of instances satisfying every predicate; cached after first use."""
        cached = self._conj_cache.get(conj)
        if cached is not None:
            return cached
        bits = self.all_mask
        for p in conj.predicates:
            if p not in self.coverage_index:
                raise KeyError(f"predicate {p.render()} not in coverage index")
            bits &= self.coverage_index[p]
        with self._cache_lock:
            self._conj_cache.setdefault(conj, bits)
        return bits

    def with_labels(self, labels: Sequence[str]) -> "Dataset":
        """Same instances and coverage, different black-box labels."""
        ds = object.__new__(Dataset)
        ds.schema = self.schema
        ds.rows = self.rows
        ds.labels = tuple(str(c) for c in labels)
        if len(ds.labels) != self.n:
            raise SchemaError(f"{len(ds.labels)} labels for {self.n} rows")
        ds.label_column = self.label_column
        ds.n = self.n
        ds.label_set = tuple(sorted(set(ds.labels)))
        ds.label_counts = {c: ds.labels.count(c) for c in ds.label_set}
        ds.label_masks = {c: _mask([i for i, y in enumerate(ds.labels) if y == c])
                          for c in ds.label_set}
        ds.all_mask = self.all_mask
        ds.coverage_index = self.coverage_index
        ds._conj_cache = self._conj_cache
        ds._cache_lock = self._cache_lock
        return ds


def _mask(indices: Iterable[int]) -> int:
    bits = 0
    for i in indices:
        bits |= 1 << i
    return bits


def popcount(bits: int) -> int:
    return bits.bit_count()


def infer_schema(header: Sequence[str], rows: Sequence[Sequence[str]],
                 binning: BinConfig) -> list[FeatureSchema]:
    """Numeric when all values parse as numbers and >2 distinct values appear
    (or an explicit override exists); categorical otherwise. Two-valued columns
    stay categorical so binary 0/1 features yield ==0 / ==1 predicates."""
    schema = []
    for j, name in enumerate(header):
        column = [r[j] for r in rows]
        override = binning.per_feature_overrides.get(name)
        distinct = sorted(set(column))
        numeric_vals = None
        try:
            numeric_vals = [float(v) for v in column]
        except ValueError:
            pass
        if override is not None:
            if numeric_vals is None:
                raise SchemaError(f"cut override on non-numeric feature {name!r}")
            cuts = sorted(set(float(c) for c in override))
            schema.append(FeatureSchema(name, NUMERIC, thresholds=tuple(cuts)))
        elif numeric_vals is not None and len(distinct) > 2:
            cuts = statistics.quantiles(numeric_vals, n=binning.quantiles, method="inclusive")
            cuts = sorted(set(cuts))
            if not cuts:
                cuts = [min(numeric_vals)]
            schema.append(FeatureSchema(name, NUMERIC, thresholds=tuple(cuts)))
        else:
            schema.append(FeatureSchema(name, CATEGORICAL, values=tuple(distinct)))
    return schema


def load_csv(path: str, label_column: str, binning: BinConfig | None = None) -> Dataset:
    """Load a CSV with a header row, binarize features, build coverage bitsets."""
    binning = binning or BinConfig()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDatasetError(f"{path} is empty")
        raw_rows = list(reader)
    if label_column not in header:
        raise SchemaError(f"label column {label_column!r} not in header {header}")
    for i, row in enumerate(raw_rows):
        if len(row) != len(header):
            raise ParseError(f"row {i + 2}: expected {len(header)} fields, got {len(row)}")
    if not raw_rows:
        raise EmptyDatasetError(f"{path} has a header but no instances")
    missing = [i + 2 for i, row in enumerate(raw_rows) if any(v == "" for v in row)]
    if missing:
        raise MissingValueError(missing)

    label_idx = header.index(label_column)
    labels = [row[label_idx] for row in raw_rows]
    feat_header = [h for h in header if h != label_column]
    feat_rows = [[v for j, v in enumerate(row) if j != label_idx] for row in raw_rows]
    schema = infer_schema(feat_header, feat_rows, binning)
    rows = [dict(zip(feat_header, row)) for row in feat_rows]
    return Dataset(schema, rows, labels, label_column=label_column)
