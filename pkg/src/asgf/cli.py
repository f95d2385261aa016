"""Command-line entry point: ``asgf-bench`` or ``python -m asgf``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .benchmarks import BENCHMARK_NAMES, get_benchmark, registry
from .harness import (
    ALGORITHMS,
    ExperimentPlan,
    compare,
    default_worker_count,
    emit_convergence_plot_data,
    load_config_file,
    run_experiment,
)


def _parse_set(items, algorithm):
    """``key=value`` overrides; ``algo.key=value`` targets one algorithm and
    bare keys apply wherever the field exists."""
    from dataclasses import fields

    from .harness import _CONFIG_TYPES, _parse_value

    known = {a: {f.name for f in fields(t)} for a, t in _CONFIG_TYPES.items()}
    values = {}
    for item in items or ():
        key, sep, text = item.partition("=")
        if not sep:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        key = key.strip()
        target, dot, name = key.rpartition(".")
        if dot:
            if target not in known:
                raise SystemExit(f"unknown algorithm prefix in {key!r}")
            if name not in known[target]:
                raise SystemExit(f"{target} has no config field {name!r}")
            if target == algorithm:
                values[name] = _parse_value(text.strip())
            continue
        if not any(key in k for k in known.values()):
            raise SystemExit(f"no algorithm has a config field {key!r}")
        if key in known[algorithm]:
            values[key] = _parse_value(text.strip())
    return values


def _overrides(args, algorithm):
    values = load_config_file(args.config, algorithm) if args.config else {}
    values.update(_parse_set(args.set, algorithm))
    return values


def _add_common(p, trials=True):
    p.add_argument("--benchmark", required=True, help="e.g. ackley-10, branin")
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--config", type=Path, help="INI file with [asgf]/[dgs]/[es] sections")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config field (optionally algo.key=...); beats --config")
    if trials:
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--workers", type=int, default=None,
                       help="parallel trials (default $ASGF_WORKERS or 1)")
    p.add_argument("--direction-workers", type=int, default=1,
                   help="threads for the directional estimates within one run")
    p.add_argument("--no-early-stop", action="store_true",
                   help="run to the algorithm's own stopping rule instead of stopping at the target")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asgf-bench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="repeated trials of one algorithm")
    _add_common(p)
    p.add_argument("--algo", choices=ALGORITHMS, default="asgf")

    p = sub.add_parser("compare", help="several algorithms on one benchmark")
    _add_common(p)
    p.add_argument("--algos", default="asgf,dgs", help="comma-separated list")
    p.add_argument("--external", type=Path, action="append", default=[],
                   help="CSV of extra rows to merge (repeatable)")

    p = sub.add_parser("trace", help="single run with full trace and plot data")
    _add_common(p, trials=False)
    p.add_argument("--algo", choices=ALGORITHMS, default="asgf")

    sub.add_parser("list-benchmarks", help="print known benchmarks")
    return parser


def _plan(args, algorithm, trials, workers):
    return ExperimentPlan(
        benchmark=args.benchmark,
        algorithm=algorithm,
        trial_count=trials,
        base_seed=args.seed,
        algorithm_config=_overrides(args, algorithm),
        output_path=args.out,
        worker_count=workers,
        direction_workers=args.direction_workers,
        stop_at_target=not args.no_early_stop,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    if args.command == "list-benchmarks":
        for spec in registry(dimension=10):
            dims = str(spec.dimension) if spec.name in ("branin", "cross-in-tray", "dropwave") else "any"
            lo, hi = spec.lower[0], spec.upper[0]
            print(f"{spec.name:<14} d={dims:<4} min={spec.global_minimum_value:.6g}  box[0]=[{lo:g}, {hi:g}]")
        return 0

    get_benchmark(args.benchmark)  # fail fast on a bad name

    if args.command == "run":
        workers = args.workers or default_worker_count()
        row = run_experiment(_plan(args, args.algo, args.trials, workers))
        print(json.dumps(row.to_dict(), indent=2, sort_keys=True))
        return 0

    if args.command == "compare":
        workers = args.workers or default_worker_count()
        algos = [a.strip() for a in args.algos.split(",") if a.strip()]
        plans = [_plan(args, a, args.trials, workers) for a in algos]
        table = compare(plans, external=args.external, output_path=args.out)
        print(table.to_text(), end="")
        return 0

    if args.command == "trace":
        plan = _plan(args, args.algo, 1, 1)
        row, trials = run_experiment(plan, return_trials=True)
        out = Path(args.out) / f"{plan.spec.label}_{plan.algorithm}"
        emit_convergence_plot_data(
            [trials[0].trace], out / "convergence.csv", svg_path=out / "convergence.svg"
        )
        t = trials[0]
        print(f"{plan.spec.label} {plan.algorithm}: best={t.best_value!r} "
              f"iterations={t.iterations} evaluations={t.evaluations} status={t.status}")
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
