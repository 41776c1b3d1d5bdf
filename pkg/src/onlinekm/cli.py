"""Command-line entry point: ``onlinekm {gen,opt,run,trace}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .core import ConfigError, CostModel, ResourceLimitError, Rng, StreamOrder, uniform_permutation
from .cost import DEFAULT_ORACLE_BUDGET, brute_force_opt
from .harness import ALGORITHMS, AlgorithmSpec, run_experiment, stream_instance
from .instances import GENERATORS, GeneratedInstance, generate


def _parse_params(pairs: list[str]) -> dict:
    """``key=value`` pairs; values are read as JSON when possible, else kept as strings."""
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"expected key=value, got {pair!r}")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


def _parse_order(text: str) -> tuple[str, int]:
    if text == "given":
        return "given", 0
    kind, _, seed = text.partition(":")
    if kind != "random" or not seed.isdigit():
        raise argparse.ArgumentTypeError("order must be 'given' or 'random:SEED'")
    return "random", int(seed)


def cmd_gen(args) -> int:
    instance = generate(args.generator, _parse_params(args.params))
    meta = instance.save(args.output)
    print(f"wrote {instance.n} points to {args.output} (metadata in {meta})", file=sys.stderr)
    return 0


def cmd_opt(args) -> int:
    data = GeneratedInstance.load(args.input).dataset
    model = CostModel.parse(args.model)
    opt = brute_force_opt(data, args.k, model, budget=args.budget)
    print(json.dumps({"k": args.k, "model": model.name, "n": data.n, "centers": list(opt.centers), "cost": opt.cost}))
    return 0


def cmd_run(args) -> int:
    with open(args.config) as fh:
        raw = json.load(fh)
    if args.output:
        raw["output"] = args.output
    if args.workers:
        raw["workers"] = args.workers
    if not raw.get("output"):
        raise ConfigError("output: no output directory in the config or on the command line")
    report = run_experiment(raw)
    agg = report.aggregates
    print(
        f"{agg['trials']} trials: mean centers {agg['centers_taken']['mean']:.3f}, "
        f"median ratio {agg['ratio']['median']:.4g}, p90 ratio {agg['ratio']['p90']:.4g}; "
        f"report in {raw['output']}",
        file=sys.stderr,
    )
    return 0


def cmd_trace(args) -> int:
    instance = GeneratedInstance.load(args.input)
    model = CostModel.parse(args.model)
    kind, seed = args.order
    seed = seed if kind == "random" else args.seed
    trial_rng = Rng(seed, 0)  # same streams as trial 0 of an experiment with this seed
    order = uniform_permutation(instance.n, trial_rng.child(0)) if kind == "random" else StreamOrder.as_given(instance.n)
    spec = AlgorithmSpec(args.algorithm, _parse_params(args.params))
    trace = stream_instance(instance, order, spec, model, trial_rng.child(1))
    out = sys.stdout
    for t, reason in enumerate(trace.reasons):
        verdict = "skip" if reason.value == "Skip" else "take"
        out.write(f"{int(order.perm[t])}\t{verdict}\t{reason.value}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onlinekm", description="Online no-substitution k-clustering toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance file (points + .meta.json)")
    p.add_argument("generator", choices=sorted(GENERATORS))
    p.add_argument("params", nargs="*", metavar="key=value", help="generator parameters, e.g. c=2 n=10")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("opt", help="print the exact k-subset optimum as JSON")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-m", "--model", default="squared_euclidean")
    p.add_argument("--budget", type=int, default=DEFAULT_ORACLE_BUDGET)
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--output", help="report directory (overrides the config)")
    p.add_argument("-j", "--workers", type=int, help="worker processes (overrides the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trace", help="print one decision line per arrival: index, take/skip, reason")
    p.add_argument("-a", "--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--order", type=_parse_order, default=("given", 0), help="'given' or 'random:SEED'")
    p.add_argument("-p", "--param", dest="params", action="append", default=[], metavar="key=value")
    p.add_argument("-m", "--model", default="squared_euclidean")
    p.add_argument("--seed", type=int, default=0, help="algorithm seed when the order is 'given'")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ResourceLimitError, KeyError, ValueError, OSError) as exc:
        print(f"onlinekm {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
