"""Empirical MSE benchmarks and analytic checks of the pre-determined schedules.

Replication ``r`` of a benchmark seeded with ``seed`` draws its trajectories
from streams under the root ``(seed, 0, r)``; simulated ground truths use the
root ``(seed, 1)``. Every strategy sees the same replication roots, so
comparisons between strategies use common random numbers.
"""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .allocator import allocate
from .core import DcsCumulative, EvalTask, counts_from_cumulative, validate_budget
from .envs import (
    DEFAULT_HORIZONS,
    ENV_NAMES,
    TrajectoryRNG,
    analytic_return,
    make_task,
    rollout,
    sample_trajectories,
    stream_key,
)
from .errors import ConfigInvalid
from .estimator import deterministic_variance
from .rido import RidoConfig, RidoTrace, run_fixed, run_rido
from .schedules import robust_allocation, robust_dcs, robust_log_weights, uniform_dcs

__all__ = [
    "STRATEGIES",
    "DEFAULT_BATCH",
    "BenchResult",
    "SweepConfig",
    "ground_truth",
    "run_strategy",
    "fixed_estimates",
    "evaluate_strategy",
    "run_sweep",
    "ratio_checks",
    "write_results",
    "write_trace",
    "RESULT_COLUMNS",
]

STRATEGIES = ("uniform", "robust", "rido")
DEFAULT_BATCH = {"terminal-chain": 100, "first-step-chain": 100, "lqg": 500, "nav2d": 1300}
RESULT_COLUMNS = ("env", "strategy", "lambda", "gamma", "T", "b", "beta", "runs", "mse", "ci95", "seconds")


@dataclass
class BenchResult:
    env: str
    strategy: str
    budget: int
    gamma: float
    horizon: int
    batch: int | None
    beta: float | None
    runs: int
    sq_errors: np.ndarray
    truth: float
    seconds: float = 0.0
    seed: int = 0

    @property
    def mse(self) -> float:
        return float(np.mean(self.sq_errors))

    @property
    def ci95(self) -> float:
        if self.runs < 2:
            return math.inf
        return 1.96 * float(np.std(self.sq_errors, ddof=1)) / math.sqrt(self.runs)

    def row(self, timings: bool = False) -> dict[str, str]:
        return {
            "env": self.env,
            "strategy": self.strategy,
            "lambda": str(self.budget),
            "gamma": repr(self.gamma),
            "T": str(self.horizon),
            "b": "" if self.batch is None else str(self.batch),
            "beta": "" if self.beta is None else repr(self.beta),
            "runs": str(self.runs),
            "mse": repr(self.mse),
            "ci95": repr(self.ci95),
            "seconds": f"{self.seconds:.3f}" if timings else "",
        }


def ground_truth(task: EvalTask, count: int = 1000, seed: int | Sequence[int] = 0) -> float:
    """Expected return: closed form when known, else a ``count``-trajectory MC mean."""
    exact = analytic_return(task)
    if exact is not None:
        return exact
    if count < 1:
        raise ValueError("ground truth needs at least one trajectory")
    rng = TrajectoryRNG.from_keys(stream_key(seed) + (1,), range(count))
    rewards = sample_trajectories(task.env, task.policy, task.horizon, rng)
    return float(np.mean(rewards @ task.gamma ** np.arange(task.horizon)))


def run_strategy(
    task: EvalTask,
    strategy: str,
    budget: int,
    root: Sequence[int],
    batch: int | None = None,
    beta: float = 1.0,
) -> tuple[float, RidoTrace | None]:
    """One replication of ``strategy``; returns the estimate and, for RIDO, its trace."""
    if strategy in ("uniform", "robust"):
        return run_fixed(task, _schedule(task, strategy, budget), root)[1], None
    if strategy == "rido":
        if batch is None:
            raise ConfigInvalid("rido needs a mini-batch size")
        trace = run_rido(task, RidoConfig(budget=budget, batch=batch, beta=beta, seed=tuple(root)))
        return trace.estimate, trace
    raise ConfigInvalid(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")


def fixed_estimates(
    task: EvalTask,
    n: DcsCumulative | Sequence[int],
    roots: Sequence[Sequence[int]],
    chunk: int = 20_000,
) -> np.ndarray:
    """Estimates from independent runs of one pre-determined DCS, simulated together.

    Run ``r`` uses the same streams as ``run_fixed(task, n, roots[r])`` and
    gives the same estimate up to floating-point summation order.
    """
    n = n if isinstance(n, DcsCumulative) else DcsCumulative(tuple(n))
    if not validate_budget(n, n.budget):
        raise ValueError(f"DCS {n.n} must keep at least one full-length trajectory")
    T = task.horizon
    lengths = counts_from_cumulative(n).lengths()
    N = lengths.size
    weights = task.gamma ** np.arange(T, dtype=float) / n.array()
    per_chunk = max(1, chunk // N)
    out = np.empty(len(roots))
    for lo in range(0, len(roots), per_chunk):
        block = [stream_key(r) for r in roots[lo : lo + per_chunk]]
        k = len(block)
        run = np.repeat(np.arange(k), N)
        index = np.tile(np.arange(N), k)
        order = np.argsort(-np.tile(lengths, k), kind="stable")
        keys = [block[run[i]] + (int(index[i]),) for i in order]
        rewards = rollout(task.env, task.policy, np.tile(lengths, k)[order], keys)
        sums = np.zeros((k, T))
        np.add.at(sums, run[order], rewards)
        out[lo : lo + k] = (sums * weights).sum(axis=1)
    return out


def _schedule(task: EvalTask, strategy: str, budget: int) -> DcsCumulative:
    if strategy == "uniform":
        return uniform_dcs(budget, task.horizon)
    return robust_dcs(budget, task.horizon, task.gamma)


def _replicate(args) -> np.ndarray:
    task, strategy, budget, roots, batch, beta = args
    if strategy in ("uniform", "robust"):
        return fixed_estimates(task, _schedule(task, strategy, budget), roots)
    return np.array([run_strategy(task, strategy, budget, r, batch, beta)[0] for r in roots])


def evaluate_strategy(
    task: EvalTask,
    strategy: str,
    budget: int,
    runs: int = 100,
    batch: int | None = None,
    beta: float = 1.0,
    seed: int = 0,
    truth: float | None = None,
    workers: int = 1,
) -> BenchResult:
    """Squared errors of ``runs`` independent replications against the ground truth."""
    if runs < 1:
        raise ConfigInvalid("runs must be positive")
    if strategy == "rido" and batch is None:
        batch = DEFAULT_BATCH.get(task.name)
    if strategy == "rido":
        RidoConfig(budget, batch or 0, beta).validate(task.horizon)
    if truth is None:
        truth = ground_truth(task, seed=seed)

    if strategy not in STRATEGIES:
        raise ConfigInvalid(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")

    started = time.perf_counter()
    roots = [(seed, 0, r) for r in range(runs)]
    if workers > 1:
        size = -(-runs // (4 * workers))
        jobs = [(task, strategy, budget, roots[i : i + size], batch, beta) for i in range(0, runs, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            estimates = np.concatenate(list(pool.map(_replicate, jobs)))
    else:
        estimates = _replicate((task, strategy, budget, roots, batch, beta))
    elapsed = time.perf_counter() - started

    rido = strategy == "rido"
    return BenchResult(
        env=task.name,
        strategy=strategy,
        budget=budget,
        gamma=task.gamma,
        horizon=task.horizon,
        batch=batch if rido else None,
        beta=beta if rido else None,
        runs=runs,
        sq_errors=(np.asarray(estimates) - truth) ** 2,
        truth=truth,
        seconds=elapsed,
        seed=seed,
    )


@dataclass
class SweepConfig:
    """Declarative multi-run benchmark; loaded from JSON.

    Example::

        {"envs": ["lqg"], "strategies": ["uniform", "rido"],
         "lambdas": [5000, 10000], "gammas": [0.99], "runs": 100,
         "seed": 0, "batch": {"lqg": 500}, "beta": 1.0}
    """

    envs: list[str]
    lambdas: list[int]
    gammas: list[float]
    strategies: list[str] = field(default_factory=lambda: list(STRATEGIES))
    runs: int = 100
    seed: int = 0
    beta: float = 1.0
    batch: dict[str, int] = field(default_factory=dict)
    horizon: dict[str, int] = field(default_factory=dict)
    workers: int = 1

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigInvalid(f"unknown sweep keys: {', '.join(sorted(unknown))}")
        for key in ("envs", "lambdas", "gammas"):
            if key not in raw:
                raise ConfigInvalid(f"sweep config is missing {key!r}")
        cfg = cls(**raw)
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "SweepConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as err:
            raise ConfigInvalid(f"{path}: {err}") from None
        if not isinstance(raw, dict):
            raise ConfigInvalid(f"{path}: expected a JSON object")
        return cls.from_dict(raw)

    def check(self) -> None:
        for env in self.envs:
            if env not in ENV_NAMES:
                raise ConfigInvalid(f"unknown environment {env!r}")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ConfigInvalid(f"unknown strategy {s!r}")
        for g in self.gammas:
            if not 0.0 < g <= 1.0:
                raise ConfigInvalid(f"gamma {g} outside (0, 1]")
        if self.runs < 1:
            raise ConfigInvalid("runs must be positive")

    def batch_for(self, env: str) -> int:
        return int(self.batch.get(env, DEFAULT_BATCH[env]))

    def horizon_for(self, env: str) -> int:
        return int(self.horizon.get(env, DEFAULT_HORIZONS[env]))


def run_sweep(cfg: SweepConfig) -> list[BenchResult]:
    results = []
    for env in cfg.envs:
        for gamma in cfg.gammas:
            task = make_task(env, gamma, cfg.horizon_for(env))
            truth = ground_truth(task, seed=cfg.seed)
            for budget in cfg.lambdas:
                for strategy in cfg.strategies:
                    if strategy == "robust" and gamma >= 1.0:
                        warnings.warn(f"skipping robust on {env} at gamma={gamma}: undefined without discounting")
                        continue
                    results.append(
                        evaluate_strategy(
                            task,
                            strategy,
                            budget,
                            runs=cfg.runs,
                            batch=cfg.batch_for(env),
                            beta=cfg.beta,
                            seed=cfg.seed,
                            truth=truth,
                            workers=cfg.workers,
                        )
                    )
    return results


def write_results(results: Iterable[BenchResult], out, timings: bool = False) -> None:
    """CSV with one row per result; ``seconds`` is left blank unless ``timings``."""
    writer = csv.DictWriter(out, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for res in results:
        writer.writerow(res.row(timings))


def write_trace(trace: RidoTrace, out) -> None:
    """Per-phase DCS dump: one row per phase, columns ``t0..t{T-1}``."""
    T = trace.dcs.horizon
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["phase", "fallback", *(f"t{t}" for t in range(T))])
    for i, (n, fell_back) in enumerate(zip(trace.phases, trace.fallbacks)):
        writer.writerow([i, int(fell_back), *n.n])


def ratio_checks(
    horizons: Sequence[int] = (2, 3, 5, 10, 20, 50),
    gammas: Sequence[float] = (0.5, 0.9, 0.99),
    budgets: Sequence[int] = (1_000, 10_000, 100_000),
) -> list[dict[str, float]]:
    """Variance ratios of uniform and robust schedules against the optimum.

    The surrogate is ``f = (1, 0, ..., 0)``: only the first reward is random.
    The optimal DCS comes from the allocator; the two schedules are taken in
    their continuous form. ``uniform_closed`` is ``T (L - T + 1) / L``;
    ``robust_bound`` is ``sum(sqrt(d)) / (2 sqrt(d_0))``.
    """
    rows = []
    for T in horizons:
        f = np.zeros(T)
        f[0] = 1.0
        for budget in budgets:
            optimal, _ = allocate(f, budget)
            best = deterministic_variance(f, optimal)
            uniform = deterministic_variance(f, np.full(T, budget / T))
            for gamma in gammas:
                log_d = robust_log_weights(gamma, T)
                rows.append(
                    {
                        "T": T,
                        "gamma": gamma,
                        "lambda": budget,
                        "uniform_ratio": uniform / best,
                        "uniform_closed": T * (budget - T + 1) / budget,
                        "robust_ratio": deterministic_variance(f, robust_allocation(budget, T, gamma)) / best,
                        "robust_bound": float(0.5 * np.exp(0.5 * (log_d - log_d[0])).sum()),
                    }
                )
    return rows
