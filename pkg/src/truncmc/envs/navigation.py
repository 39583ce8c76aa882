"""2-D continuous navigation towards a goal in the far corner of a square room."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import TrajectoryRNG


@dataclass(frozen=True)
class Navigation2D:
    size: float = 92.0
    goal: tuple[float, float] = (91.0, 91.0)
    goal_radius: float = 1.0
    action_var: float = 0.1
    start_high: float = 5.0
    reward_mean: float = 1.0
    reward_var: float = 1.0

    def reset(self, rng: TrajectoryRNG) -> np.ndarray:
        return rng.uniform(0.0, self.start_high, d=2)

    def step(self, states, actions, rng: TrajectoryRNG):
        moves = actions + rng.normal(0.0, math.sqrt(self.action_var), d=2)
        nxt = np.clip(states + moves, 0.0, self.size)
        bonus = rng.normal(self.reward_mean, math.sqrt(self.reward_var))
        in_goal = np.linalg.norm(nxt - np.asarray(self.goal), axis=1) <= self.goal_radius
        return nxt, np.where(in_goal, bonus, 0.0)


@dataclass(frozen=True)
class GreedyPolicy:
    """Heads straight for the goal, one unit per axis at most."""

    goal: tuple[float, float] = (91.0, 91.0)

    def act(self, states, rng: TrajectoryRNG) -> np.ndarray:
        return np.clip(np.asarray(self.goal) - states, -1.0, 1.0)


def make_navigation2d() -> tuple[Navigation2D, GreedyPolicy]:
    env = Navigation2D()
    return env, GreedyPolicy(env.goal)
