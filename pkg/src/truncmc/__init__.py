"""Monte-Carlo policy evaluation with truncated trajectories and adaptive budget allocation."""

from __future__ import annotations

from .allocator import (
    UNIFORM_FALLBACK,
    ContinuousAllocation,
    ExplorationBonuses,
    Group,
    GroupedProblem,
    UniformFallback,
    allocate,
    brute_force_oracle,
    compute_bonuses,
    empirical_surrogate,
    group_partition,
    round_allocation,
    solve_grouped,
    surrogate_value,
)
from .bench import BenchResult, SweepConfig, evaluate_strategy, ground_truth, run_sweep
from .core import (
    DcsCounts,
    DcsCumulative,
    EvalTask,
    counts_from_cumulative,
    cumulative_from_counts,
    validate_budget,
)
from .envs import ENV_NAMES, make_task
from .errors import *  # noqa: F401,F403
from .estimator import (
    RewardDataset,
    deterministic_variance,
    empirical_cov,
    empirical_std,
    estimate_return,
    exact_surrogate,
    hoeffding_width,
    reward_moments,
)
from .rido import RidoConfig, RidoTrace, run_fixed, run_rido
from .schedules import (
    RobustFallbackWarning,
    robust_allocation,
    robust_dcs,
    robust_threshold,
    robust_weights,
    uniform_dcs,
)

__version__ = "0.1.0"
