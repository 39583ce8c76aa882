"""Command-line entry point: ``truncmc <run|sweep|oracle|schedule|trace|props>``."""

from __future__ import annotations

import argparse
import sys
import warnings
from contextlib import contextmanager
from typing import Iterator, Sequence, TextIO

from .allocator import brute_force_oracle
from .bench import (
    DEFAULT_BATCH,
    STRATEGIES,
    SweepConfig,
    evaluate_strategy,
    ratio_checks,
    run_sweep,
    write_results,
    write_trace,
)
from .envs import ENV_NAMES, RewardChain, make_task
from .errors import InstanceTooLarge, TruncMCError
from .rido import RidoConfig, run_rido
from .schedules import robust_dcs, uniform_dcs


@contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _add_env(p: argparse.ArgumentParser) -> None:
    p.add_argument("--env", required=True, choices=ENV_NAMES)
    p.add_argument("--horizon", type=int, default=None, help="override the environment's default horizon")


def cmd_run(args) -> int:
    task = make_task(args.env, args.gamma, args.horizon)
    batch = args.batch if args.batch is not None else DEFAULT_BATCH[args.env]
    res = evaluate_strategy(
        task,
        args.strategy,
        args.budget,
        runs=args.runs,
        batch=batch,
        beta=args.beta,
        seed=args.seed,
        workers=args.workers,
    )
    with _output(args.out) as fh:
        write_results([res], fh, timings=args.timings)
    return 0


def cmd_sweep(args) -> int:
    cfg = SweepConfig.load(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    results = run_sweep(cfg)
    with _output(args.out) as fh:
        write_results(results, fh, timings=args.timings)
    return 0


def cmd_oracle(args) -> int:
    task = make_task(args.env, args.gamma, args.horizon)
    if not isinstance(task.env, RewardChain):
        raise TruncMCError(f"no analytic surrogate for {args.env!r}; the oracle needs exact moments")
    f = task.env.analytic_surrogate(task.gamma, task.horizon)
    try:
        n, value = brute_force_oracle(f, args.budget, task.horizon)
    except InstanceTooLarge as err:
        raise InstanceTooLarge(f"{err}; pass a smaller --horizon") from None
    print("n = " + " ".join(map(str, n.n)))
    print(f"value = {value!r}")
    return 0


def cmd_schedule(args) -> int:
    if args.strategy == "uniform":
        n = uniform_dcs(args.budget, args.horizon)
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            n = robust_dcs(args.budget, args.horizon, args.gamma)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    print(" ".join(map(str, n.n)))
    return 0


def cmd_trace(args) -> int:
    task = make_task(args.env, args.gamma, args.horizon)
    batch = args.batch if args.batch is not None else DEFAULT_BATCH[args.env]
    trace = run_rido(task, RidoConfig(budget=args.budget, batch=batch, beta=args.beta, seed=args.seed))
    with _output(args.out) as fh:
        write_trace(trace, fh)
    return 0


def cmd_props(args) -> int:
    rows = ratio_checks()
    cols = list(rows[0])
    print(",".join(cols))
    for row in rows:
        print(",".join(f"{row[c]:.6g}" for c in cols))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="truncmc",
        description="Monte-Carlo policy evaluation with truncated trajectories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="benchmark one strategy on one environment")
    _add_env(p)
    p.add_argument("--strategy", required=True, choices=STRATEGIES)
    p.add_argument("--lambda", dest="budget", type=int, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--batch", type=int, default=None, help="RIDO mini-batch (default per environment)")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timings", action="store_true", help="fill the seconds column")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a JSON-declared grid of benchmarks")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--timings", action="store_true", help="fill the seconds column")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exhaustive optimal DCS from exact moments (chains only)")
    _add_env(p)
    p.add_argument("--lambda", dest="budget", type=int, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("schedule", help="print a pre-determined DCS")
    p.add_argument("--strategy", required=True, choices=("uniform", "robust"))
    p.add_argument("--lambda", dest="budget", type=int, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--horizon", type=int, required=True)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("trace", help="dump the per-phase DCSs of one RIDO run")
    _add_env(p)
    p.add_argument("--lambda", dest="budget", type=int, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("props", help="uniform and robust variance ratios against the optimum")
    p.set_defaults(func=cmd_props)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TruncMCError, ValueError, OSError) as err:
        print(f"truncmc: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
