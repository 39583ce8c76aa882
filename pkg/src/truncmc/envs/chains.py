"""Two-action chains whose only stochastic reward sits at a single timestep.

The state is the timestep itself. At the rewarding step, action 0 pays
``N(3, 10)`` and action 1 pays ``N(2, 10)`` (mean, variance); every other step
pays exactly 0. The evaluated policy picks actions uniformly at random, so the
rewarding step has mean 2.5 and variance ``10 + 0.25 * (3 - 2)**2 = 10.25``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import TrajectoryRNG

ARM_MEANS = (3.0, 2.0)
ARM_VARIANCE = 10.0
CHAIN_HORIZON = 10


@dataclass(frozen=True)
class RewardChain:
    reward_step: int
    means: tuple[float, float] = ARM_MEANS
    variance: float = ARM_VARIANCE

    def reset(self, rng: TrajectoryRNG) -> np.ndarray:
        return np.zeros(len(rng), dtype=np.int64)

    def step(self, states, actions, rng: TrajectoryRNG):
        noise = rng.normal(0.0, math.sqrt(self.variance))
        mean = np.where(np.asarray(actions) == 0, self.means[0], self.means[1])
        rewards = np.where(states == self.reward_step, mean + noise, 0.0)
        return states + 1, rewards

    @property
    def reward_mean(self) -> float:
        return 0.5 * (self.means[0] + self.means[1])

    @property
    def reward_variance(self) -> float:
        # uniform mixture of two Gaussians with a shared variance
        return self.variance + 0.25 * (self.means[0] - self.means[1]) ** 2

    def analytic_return(self, gamma: float, horizon: int) -> float:
        if self.reward_step >= horizon:
            return 0.0
        return gamma**self.reward_step * self.reward_mean

    def analytic_moments(self, horizon: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-step reward variances and (all-zero) covariances."""
        var = np.zeros(horizon)
        if self.reward_step < horizon:
            var[self.reward_step] = self.reward_variance
        return var, np.zeros((horizon, horizon))

    def analytic_surrogate(self, gamma: float, horizon: int) -> np.ndarray:
        var, _ = self.analytic_moments(horizon)
        return gamma ** (2.0 * np.arange(horizon)) * var


@dataclass(frozen=True)
class UniformRandomPolicy:
    num_actions: int = 2

    def act(self, states, rng: TrajectoryRNG) -> np.ndarray:
        return rng.integers(0, self.num_actions)


def make_terminal_chain(horizon: int = CHAIN_HORIZON) -> tuple[RewardChain, UniformRandomPolicy]:
    """Reward only at the last step of the horizon."""
    return RewardChain(reward_step=horizon - 1), UniformRandomPolicy()


def make_first_step_chain() -> tuple[RewardChain, UniformRandomPolicy]:
    """Reward only at the first step."""
    return RewardChain(reward_step=0), UniformRandomPolicy()
