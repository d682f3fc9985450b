"""Command line interface.

Subcommands: fit (write an explanation JSON), sweep (write a trade-off CSV),
predict (label one instance from a saved explanation), serve (HTTP service),
gen (synthetic planted dataset). Exit codes: 0 success, 1 usage error,
2 runtime error. BETA_STORE_DIR overrides --store-dir for serve.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .data import BinConfig, load_csv
from .errors import TwoLevelError
from .mining import MinerConfig
from .objective import ObjectiveConfig
from .oracle import OracleSource
from .pipeline import (ExplainRequest, SweepSpec, explain, model_from_explanation,
                       sweep, to_canonical_json)
from .planted import PlantedSpec, generate, write_csv


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--label-col", default="label", help="black-box label column")
    p.add_argument("--oracle", default="column",
                   help="column | cmd:<command line> | http(s)://host:port")
    p.add_argument("--support", type=float, default=0.05, help="minimum support")
    p.add_argument("--max-candidates", type=int, default=200)
    p.add_argument("--eps", default="10,5,4",
                   help="rule, width and descriptor budgets: a,b,c")
    p.add_argument("--lambda", dest="weights", default="0.2,0.2,0.2,0.2,0.2",
                   help="five objective weights")
    p.add_argument("--features", default=None, help="restrict descriptors to these")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--normalize", choices=("true", "false"), default="true")
    p.add_argument("--binning", default=None, help="bin-config JSON")


def _parse_ints(text: str, count: int, flag: str) -> list[int]:
    parts = text.split(",")
    if len(parts) != count:
        raise UsageError(f"{flag} needs {count} comma-separated values")
    try:
        return [int(x) for x in parts]
    except ValueError:
        raise UsageError(f"{flag} values must be integers")


def _request_from_args(args) -> ExplainRequest:
    eps = _parse_ints(args.eps, 3, "--eps")
    if min(eps) < 1:
        raise UsageError("--eps budgets must all be >= 1")
    try:
        weights = tuple(float(x) for x in args.weights.split(","))
    except ValueError:
        raise UsageError("--lambda values must be numbers")
    if len(weights) != 5:
        raise UsageError("--lambda needs 5 comma-separated values")
    binning = BinConfig.from_json(args.binning) if args.binning else BinConfig()
    dataset = load_csv(args.data, args.label_col, binning)
    objective = ObjectiveConfig(weights=weights, max_rules=eps[0], max_width=eps[1],
                                max_descriptors=eps[2], delta=args.delta,
                                normalize=args.normalize == "true")
    miner = MinerConfig(min_support=args.support, max_width=min(eps[1], 3),
                        max_candidates=args.max_candidates)
    oracle = OracleSource.parse(args.oracle) if args.oracle != "column" else None
    features = frozenset(args.features.split(",")) if args.features else None
    return ExplainRequest(dataset=dataset, oracle=oracle, miner=miner,
                          objective=objective, user_features=features, seed=args.seed)


def build_parser() -> _Parser:
    parser = _Parser(prog="twolevel",
                     description="Approximate a black-box classifier with a "
                                 "compact two-level decision set")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit an explanation and write it as JSON")
    _add_fit_flags(fit)
    fit.add_argument("--out", required=True, help="output explanation path")

    sw = sub.add_parser("sweep", help="vary one budget and write a CSV")
    _add_fit_flags(sw)
    sw.add_argument("--axis", required=True,
                    choices=("eps1", "eps2", "eps3", "min_support"))
    sw.add_argument("--values", required=True, help="ascending axis values")
    sw.add_argument("--out", required=True, help="output CSV path")

    pred = sub.add_parser("predict", help="label one instance from an explanation")
    pred.add_argument("--explanation", required=True)
    pred.add_argument("--instance", required=True, help="JSON feature map")

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--port", type=int, default=8700)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--store-dir", default="./twolevel-store")

    gen = sub.add_parser("gen", help="generate a planted-model dataset")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--truth", default=None, help="write the planted rules here")
    gen.add_argument("--n", type=int, default=2000)
    gen.add_argument("--features", type=int, default=10)
    gen.add_argument("--descriptors", type=int, default=3)
    gen.add_argument("--rules-per", type=int, default=2)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    return parser


def _run_fit(args) -> int:
    doc = explain(_request_from_args(args))
    text = to_canonical_json(doc)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    m = doc["metrics"]
    print(f"wrote {args.out}: {m['size']} rules, agreement "
          f"{m['agreement_rate']:.4f}, cover {m['cover_fraction']:.4f}")
    return 0


def _run_sweep(args) -> int:
    request = _request_from_args(args)
    values = args.values.split(",")
    axis_values = tuple(float(v) if args.axis == "min_support" else int(v)
                        for v in values)
    rows, csv_text = sweep(SweepSpec(args.axis, axis_values, request))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    failures = sum(1 for r in rows if r["error"])
    print(f"wrote {args.out}: {len(rows)} points, {failures} failed")
    return 0


def _run_predict(args) -> int:
    with open(args.explanation, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        instance = json.loads(args.instance)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--instance is not valid JSON: {exc}")
    if not isinstance(instance, dict):
        raise UsageError("--instance must be a JSON object")
    model = model_from_explanation(doc)
    prediction = model.predict_instance(instance)
    print(json.dumps({
        "label": prediction.label,
        "provenance": {"kind": prediction.kind, "rule_index": prediction.rule_index},
        "fired_rules": list(prediction.fired),
    }))
    return 0


def resolve_store_dir(flag_value: str) -> str:
    return os.environ.get("BETA_STORE_DIR") or flag_value


def _run_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(resolve_store_dir(args.store_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _run_gen(args) -> int:
    spec = PlantedSpec(n_instances=args.n, n_features=args.features,
                       n_descriptors=args.descriptors,
                       rules_per_descriptor=args.rules_per,
                       noise=args.noise, seed=args.seed)
    model, dataset = generate(spec)
    write_csv(dataset, args.out)
    if args.truth:
        with open(args.truth, "w", encoding="utf-8") as fh:
            json.dump(model.truth_dict(), fh, indent=2)
    print(f"wrote {args.out}: {dataset.n} instances, "
          f"{len(model.rules)} planted rules")
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        runner = {"fit": _run_fit, "sweep": _run_sweep, "predict": _run_predict,
                  "serve": _run_serve, "gen": _run_gen}[args.command]
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return runner(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (TwoLevelError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
