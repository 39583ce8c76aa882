"""Simulated environments, evaluated policies and the trajectory sampler."""

from __future__ import annotations

from ..core import EvalTask
from .base import (
    Environment,
    Policy,
    TrajectoryRNG,
    collect,
    rollout,
    sample_trajectories,
    sample_trajectory,
    stream_key,
)
from .chains import (
    CHAIN_HORIZON,
    RewardChain,
    UniformRandomPolicy,
    make_first_step_chain,
    make_terminal_chain,
)
from .lqg import LQG, LinearPolicy, make_lqg, riccati_gain
from .navigation import GreedyPolicy, Navigation2D, make_navigation2d

__all__ = [
    "Environment",
    "Policy",
    "TrajectoryRNG",
    "collect",
    "rollout",
    "sample_trajectories",
    "sample_trajectory",
    "stream_key",
    "RewardChain",
    "UniformRandomPolicy",
    "make_terminal_chain",
    "make_first_step_chain",
    "LQG",
    "LinearPolicy",
    "make_lqg",
    "riccati_gain",
    "Navigation2D",
    "GreedyPolicy",
    "make_navigation2d",
    "ENV_NAMES",
    "DEFAULT_HORIZONS",
    "make_task",
    "analytic_return",
]

DEFAULT_HORIZONS = {
    "terminal-chain": CHAIN_HORIZON,
    "first-step-chain": CHAIN_HORIZON,
    "lqg": 50,
    "nav2d": 130,
}
ENV_NAMES = tuple(DEFAULT_HORIZONS)


def make_task(name: str, gamma: float, horizon: int | None = None) -> EvalTask:
    """Build a named evaluation task; ``horizon`` defaults per environment."""
    if name not in DEFAULT_HORIZONS:
        raise ValueError(f"unknown environment {name!r}; choose from {', '.join(ENV_NAMES)}")
    T = DEFAULT_HORIZONS[name] if horizon is None else int(horizon)
    if name == "terminal-chain":
        env, policy = make_terminal_chain(T)
    elif name == "first-step-chain":
        env, policy = make_first_step_chain()
    elif name == "lqg":
        env, policy = make_lqg(gamma)
    else:
        env, policy = make_navigation2d()
    return EvalTask(env=env, policy=policy, horizon=T, gamma=gamma, name=name)


def analytic_return(task: EvalTask) -> float | None:
    """Closed-form expected return when the environment provides one."""
    env = task.env
    if isinstance(env, RewardChain):
        return env.analytic_return(task.gamma, task.horizon)
    if isinstance(env, LQG) and isinstance(task.policy, LinearPolicy):
        return env.analytic_return(task.gamma, task.horizon, task.policy.gain)
    return None
