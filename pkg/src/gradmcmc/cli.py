"""Command-line harness.

Subcommands:
  run <config.json> [--out DIR] [--seed N] [--jobs K]   run one experiment
  ess <trace.csv>                                       per-column ESS of a table
  bench [...]                                           built-in benchmark suite
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .diagnostics import ess
from .errors import ConfigError, DatasetError
from .harness import (
    ExperimentConfig,
    SamplerSpec,
    TargetSpec,
    load_config,
    read_numeric_csv,
    run_experiment,
)

BENCH_TARGETS = (
    TargetSpec("neal_gaussian", {"dim": 100}),
    TargetSpec("correlated_gaussian", {"correlation": 0.99}),
    TargetSpec("kernel_gaussian", {"grid_points": 51, "low": 0.0, "high": 4.0}),
    TargetSpec("synthetic_logistic", {"num_points": 500, "num_features": 10,
                                      "prior_variance": 100.0, "data_seed": 0}),
)

BENCH_SAMPLERS = ("gadRWM", "gadMALAf", "gadMALAe", "RWM", "MALA", "AM", "HMC")


def _build_parser():
    parser = argparse.ArgumentParser(prog="gradmcmc",
                                     description="Gradient-based adaptive MCMC harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config", help="path to the experiment configuration")
    p_run.add_argument("--out", help="override the configured output directory")
    p_run.add_argument("--seed", type=int, help="override the base seed")
    p_run.add_argument("--jobs", type=int, help="override the worker count")

    p_ess = sub.add_parser("ess", help="print per-column ESS of a numeric CSV")
    p_ess.add_argument("trace", help="CSV file of chain values, one column per series")

    p_bench = sub.add_parser("bench", help="run the built-in benchmark suite")
    p_bench.add_argument("--out", default="bench_results", help="output directory")
    p_bench.add_argument("--seed", type=int, default=0, help="base seed")
    p_bench.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    p_bench.add_argument("--repeats", type=int, default=10)
    p_bench.add_argument("--burn-in", type=int, default=20000)
    p_bench.add_argument("--samples", type=int, default=20000)
    p_bench.add_argument("--samplers", nargs="+", default=list(BENCH_SAMPLERS),
                         help="sampler kinds to include")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.output_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs is not None:
        cfg.jobs = args.jobs
    result = run_experiment(cfg)
    failures = sum(1 for row in result.run_rows if row["error"])
    print(f"wrote {len(result.run_rows)} run rows and "
          f"{len(result.aggregate_rows)} aggregate rows to {result.output_dir}")
    if failures:
        print(f"{failures} run(s) failed; see the error column", file=sys.stderr)
    return 0


def _cmd_ess(args) -> int:
    names, data, _ = read_numeric_csv(args.trace)
    for j, name in enumerate(names):
        print(f"{name} {ess(data[:, j])!r}")
    return 0


def _cmd_bench(args) -> int:
    out_root = Path(args.out)
    for target in BENCH_TARGETS:
        cfg = ExperimentConfig(
            target=target,
            samplers=_bench_samplers(args.samplers),
            burn_in=args.burn_in,
            samples=args.samples,
            repeats=args.repeats,
            seed=args.seed,
            output_dir=str(out_root / target.kind),
            jobs=args.jobs,
        )
        print(f"[bench] {target.kind}: {len(cfg.samplers)} samplers x {cfg.repeats} repeats")
        result = run_experiment(cfg)
        failures = sum(1 for row in result.run_rows if row["error"])
        if failures:
            print(f"[bench] {target.kind}: {failures} run(s) failed", file=sys.stderr)
    print(f"benchmark results under {out_root}")
    return 0


def _bench_samplers(kinds):
    specs = []
    for kind in kinds:
        if kind == "HMC":
            for steps in (5, 10, 20):
                specs.append(SamplerSpec(kind="HMC", label=f"HMC-{steps}",
                                         options={"leapfrog_steps": steps}))
        else:
            specs.append(SamplerSpec(kind=kind))
    return specs


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "ess":
            return _cmd_ess(args)
        return _cmd_bench(args)
    except (ConfigError, DatasetError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
