"""Scalar linear-quadratic Gaussian regulator.

Dynamics ``s' = s + (a + xi) + eta`` with ``xi, eta ~ N(0, 0.1)`` (variance),
initial state uniform on ``[-80, 80]``. The per-step quantity
``s**2 + (a + xi)**2`` is a cost; it is emitted negated so that larger is
better, as for every other environment in the package. The evaluated policy is
the linear feedback ``a = -K s`` from the discounted Riccati equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import TrajectoryRNG


def riccati_gain(gamma: float, tol: float = 1e-12, max_iter: int = 100_000) -> tuple[float, float, int]:
    """Fixed point of ``P = 1 + g P - g^2 P^2 / (1 + g P)`` for ``s' = s + a``, cost ``s^2 + a^2``.

    Returns ``(P, K, iterations)`` with feedback gain ``K = g P / (1 + g P)``.
    """
    P = 1.0
    for it in range(1, max_iter + 1):
        nxt = 1.0 + gamma * P - (gamma * P) ** 2 / (1.0 + gamma * P)
        if abs(nxt - P) < tol:
            P = nxt
            break
        P = nxt
    else:
        raise RuntimeError("Riccati iteration did not converge")
    return P, gamma * P / (1.0 + gamma * P), it


@dataclass(frozen=True)
class LQG:
    init_bound: float = 80.0
    process_var: float = 0.1
    control_var: float = 0.1

    def reset(self, rng: TrajectoryRNG) -> np.ndarray:
        return rng.uniform(-self.init_bound, self.init_bound)

    def step(self, states, actions, rng: TrajectoryRNG):
        applied = actions + rng.normal(0.0, math.sqrt(self.control_var))
        nxt = states + applied + rng.normal(0.0, math.sqrt(self.process_var))
        return nxt, -(states**2 + applied**2)

    def analytic_return(self, gamma: float, horizon: int, gain: float) -> float:
        """Expected discounted reward under ``a = -gain * s``."""
        second = self.init_bound**2 / 3.0  # E[s_0^2]
        total = 0.0
        for t in range(horizon):
            total += gamma**t * -((1.0 + gain**2) * second + self.control_var)
            second = (1.0 - gain) ** 2 * second + self.control_var + self.process_var
        return total


@dataclass(frozen=True)
class LinearPolicy:
    gain: float

    def act(self, states, rng: TrajectoryRNG) -> np.ndarray:
        return -self.gain * states


def make_lqg(gamma: float = 1.0) -> tuple[LQG, LinearPolicy]:
    _, gain, _ = riccati_gain(gamma)
    return LQG(), LinearPolicy(gain)
