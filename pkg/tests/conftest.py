import random

import pytest

from twolevel.data import BinConfig, Conjunction, Dataset, Predicate, load_csv
from twolevel.decision_set import Rule

# Binary toy table: Pos iff (Old and (Male or Smokes)) or (not Old and Male and Smokes)
TOY8_ROWS = [
    ("1", "1", "1", "Pos"),
    ("1", "1", "0", "Pos"),
    ("1", "0", "1", "Pos"),
    ("1", "0", "0", "Neg"),
    ("0", "1", "1", "Pos"),
    ("0", "1", "0", "Neg"),
    ("0", "0", "1", "Neg"),
    ("0", "0", "0", "Neg"),
]
TOY8_HEADER = ("Old", "Male", "Smokes", "label")


def write_toy8(path) -> str:
    lines = [",".join(TOY8_HEADER)] + [",".join(r) for r in TOY8_ROWS]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def toy8_csv(tmp_path):
    return write_toy8(tmp_path / "toy8.csv")


@pytest.fixture
def toy8(toy8_csv) -> Dataset:
    return load_csv(toy8_csv, "label")


def eq(feature: str, value: str) -> Predicate:
    return Predicate(feature, "==", value)


def conj(*preds: Predicate) -> Conjunction:
    return Conjunction(preds)


def rule(q: Conjunction, s: Conjunction, c: str) -> Rule:
    return Rule(q, s, c)


@pytest.fixture
def r1_rules() -> list[Rule]:
    # two rules under the Old==1 descriptor, split on Male
    return [
        rule(conj(eq("Old", "1")), conj(eq("Male", "1")), "Pos"),
        rule(conj(eq("Old", "1")), conj(eq("Male", "0")), "Neg"),
    ]


@pytest.fixture
def r2_rules() -> list[Rule]:
    # overlapping bodies: instance (1,1,1) satisfies both
    return [
        rule(conj(eq("Old", "1")), conj(eq("Smokes", "1")), "Pos"),
        rule(conj(eq("Male", "1")), conj(eq("Smokes", "1")), "Pos"),
    ]


def random_binary_dataset(rng: random.Random, n_rows: int, n_features: int,
                          labels=("A", "B")) -> Dataset:
    """Random 0/1 table with random black-box labels, loaded through the schema path."""
    from twolevel.data import FeatureSchema, CATEGORICAL

    names = [f"f{j}" for j in range(n_features)]
    rows = [{name: str(rng.randint(0, 1)) for name in names} for _ in range(n_rows)]
    # make sure both values occur so each feature yields two predicates
    for j, name in enumerate(names):
        if len({r[name] for r in rows}) == 1:
            rows[rng.randrange(n_rows)][name] = "1" if rows[0][name] == "0" else "0"
    schema = [FeatureSchema(name, CATEGORICAL, values=("0", "1")) for name in names]
    y = [rng.choice(labels) for _ in range(n_rows)]
    return Dataset(schema, rows, y)


def random_rules(rng: random.Random, ds: Dataset, n_rules: int,
                 max_side_width: int = 2) -> list[Rule]:
    """Random satisfiable rules drawn from the dataset's predicate space."""
    preds = ds.predicates()
    out = []
    guard = 0
    while len(out) < n_rules and guard < 200:
        guard += 1
        try:
            q = Conjunction(rng.sample(preds, rng.randint(1, max_side_width)))
            s = Conjunction(rng.sample(preds, rng.randint(1, max_side_width)))
        except Exception:
            continue
        out.append(Rule(q, s, rng.choice(ds.label_set)))
    return out
