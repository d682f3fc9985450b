"""Approximate a black-box classifier with a compact two-level decision set."""

from .data import BinConfig, Conjunction, Dataset, FeatureSchema, Predicate, load_csv
from .decision_set import (Prediction, Rule, TwoLevelDecisionSet, agreement_rate,
                           fit_default_and_ties)
from .metrics import MetricsReport, report
from .mining import CandidateDomain, MinerConfig, build_domain, mine
from .objective import BoundConstants, ObjectiveConfig, bounds, delta_value, feasible, value
from .oracle import OracleSource, label_all
from .search import SearchLimits, SearchResult, brute_force, optimize

__version__ = "0.1.0"

__all__ = [
    "BinConfig", "BoundConstants", "CandidateDomain", "Conjunction", "Dataset",
    "FeatureSchema", "MetricsReport", "MinerConfig", "ObjectiveConfig", "OracleSource",
    "Prediction", "Rule", "SearchLimits", "SearchResult", "TwoLevelDecisionSet",
    "agreement_rate", "bounds", "brute_force", "build_domain", "delta_value",
    "feasible", "fit_default_and_ties", "label_all", "load_csv", "mine", "optimize",
    "report", "value",
]
