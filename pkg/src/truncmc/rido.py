"""Adaptive data collection: the budget is spent in mini-batches, each allocated
by minimising an optimistic estimate of the estimator variance built from all
data gathered so far.

Trajectory ``k`` of a run (counted across phases, longest first within a
phase) always uses random stream ``seed + (k,)``. A run whose phases all
happen to be uniform therefore reproduces the uniform baseline exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .allocator import allocate, compute_bonuses, empirical_surrogate
from .core import (
    DcsCumulative,
    EvalTask,
    counts_from_cumulative,
    validate_budget,
)
from .envs import collect, stream_key
from .errors import ConfigInvalid
from .estimator import RewardDataset, estimate_return, reward_moments
from .schedules import uniform_dcs

__all__ = ["RidoConfig", "RidoTrace", "run_fixed", "run_rido"]


@dataclass(frozen=True)
class RidoConfig:
    budget: int
    batch: int
    beta: float = 1.0
    seed: int | tuple[int, ...] = 0

    @property
    def phases(self) -> int:
        return self.budget // self.batch

    def validate(self, T: int) -> None:
        if self.batch <= 0 or self.budget <= 0:
            raise ConfigInvalid("budget and batch size must be positive")
        if self.batch % T:
            raise ConfigInvalid(f"batch {self.batch} is not a multiple of the horizon {T}")
        if self.batch < 2 * T:
            raise ConfigInvalid(f"batch {self.batch} must be at least twice the horizon {T}")
        if self.budget % self.batch:
            raise ConfigInvalid(f"budget {self.budget} is not a multiple of the batch {self.batch}")
        if not self.beta >= 1.0:
            raise ConfigInvalid(f"beta must be >= 1, got {self.beta}")


@dataclass
class RidoTrace:
    phases: list[DcsCumulative]
    dataset: RewardDataset
    dcs: DcsCumulative
    estimate: float
    fallbacks: list[bool] = field(default_factory=list)


def run_fixed(task: EvalTask, n: DcsCumulative | Sequence[int], seed: int | Sequence[int] = 0) -> tuple[RewardDataset, float]:
    """Collect a pre-determined DCS and return the data with its return estimate."""
    n = n if isinstance(n, DcsCumulative) else DcsCumulative(tuple(n))
    if n.horizon != task.horizon:
        raise ValueError(f"DCS horizon {n.horizon} differs from task horizon {task.horizon}")
    if not validate_budget(n, n.budget):
        raise ValueError(f"DCS {n.n} must keep at least one full-length trajectory")
    rewards, lengths = collect(task.env, task.policy, counts_from_cumulative(n), stream_key(seed))
    data = RewardDataset(task.horizon, rewards, lengths)
    return data, estimate_return(data, n, task.gamma)


def run_rido(task: EvalTask, cfg: RidoConfig) -> RidoTrace:
    T = task.horizon
    cfg.validate(T)
    root = stream_key(cfg.seed)

    first = uniform_dcs(cfg.batch, T)
    rewards, lengths = collect(task.env, task.policy, counts_from_cumulative(first), root)
    data = RewardDataset(T, rewards, lengths)
    phases, fallbacks = [first], [False]

    for _ in range(1, cfg.phases):
        stds, covs = reward_moments(data)
        bonuses = compute_bonuses(data.counts(), cfg.beta) if cfg.beta > 1.0 else None
        f_hat = empirical_surrogate(stds, covs, bonuses, task.gamma)
        n_i, fell_back = allocate(f_hat, cfg.batch)
        rewards, lengths = collect(task.env, task.policy, counts_from_cumulative(n_i), root, start=len(data))
        data.append(rewards, lengths)
        phases.append(n_i)
        fallbacks.append(fell_back)

    total = sum(phases[1:], phases[0])
    return RidoTrace(
        phases=phases,
        dataset=data,
        dcs=total,
        estimate=estimate_return(data, total, task.gamma),
        fallbacks=fallbacks,
    )
