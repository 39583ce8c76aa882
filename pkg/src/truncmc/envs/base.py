"""Environment/policy interfaces and the batched trajectory sampler.

Environments and policies operate on a batch of trajectories at once: states
are arrays whose first axis indexes trajectories. Randomness comes from a
:class:`TrajectoryRNG`, which owns one independent stream per trajectory.
Draws for a trajectory therefore depend only on its key and on how many steps
it has taken, never on which other trajectories share the batch. A truncated
trajectory sees exactly the prefix of the rewards its full-length version would.
"""

from __future__ import annotations

from typing import Iterable, Protocol, Sequence, runtime_checkable

import numpy as np
from scipy.special import ndtri

from ..core import DcsCounts

__all__ = [
    "TrajectoryRNG",
    "Environment",
    "Policy",
    "stream_key",
    "sample_trajectory",
    "sample_trajectories",
    "rollout",
    "collect",
]

_HALF_ULP = 2.0**-54


def stream_key(seed: int | Sequence[int]) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


class TrajectoryRNG:
    """One random stream per trajectory, drawn row-wise.

    Every ``draw`` returns one row per trajectory. Uniforms are buffered per
    stream in blocks so the Python-level loop over streams runs rarely.
    """

    def __init__(self, generators: Iterable[np.random.Generator], block: int = 64):
        self._gens = list(generators)
        self._block = block
        self._buf = np.empty((len(self._gens), 0))
        self._pos = 0

    @classmethod
    def from_keys(cls, root: Sequence[int], indices: Iterable[int], block: int = 64) -> "TrajectoryRNG":
        root = stream_key(root)
        return cls.from_key_list([root + (int(k),) for k in indices], block)

    @classmethod
    def from_key_list(cls, keys: Iterable[Sequence[int]], block: int = 64) -> "TrajectoryRNG":
        gens = [np.random.default_rng(np.random.SeedSequence(list(k))) for k in keys]
        return cls(gens, block)

    def __len__(self) -> int:
        return len(self._gens)

    def keep(self, k: int) -> None:
        """Drop every stream after the first ``k``; the survivors are unaffected."""
        del self._gens[k:]
        self._buf = self._buf[:k]

    def _take(self, d: int) -> np.ndarray:
        if self._pos + d > self._buf.shape[1]:
            need = max(self._block, d)
            fresh = np.array([g.random(need) for g in self._gens]).reshape(len(self._gens), need)
            self._buf = np.concatenate([self._buf[:, self._pos :], fresh], axis=1)
            self._pos = 0
        out = self._buf[:, self._pos : self._pos + d]
        self._pos += d
        return out

    def random(self, d: int | None = None) -> np.ndarray:
        u = self._take(1 if d is None else d)
        return u[:, 0] if d is None else u

    def uniform(self, low: float = 0.0, high: float = 1.0, d: int | None = None) -> np.ndarray:
        return low + (high - low) * self.random(d)

    def normal(self, loc: float = 0.0, scale: float = 1.0, d: int | None = None) -> np.ndarray:
        return loc + scale * ndtri(self.random(d) + _HALF_ULP)

    def integers(self, low: int, high: int, d: int | None = None) -> np.ndarray:
        return (low + np.floor((high - low) * self.random(d))).astype(np.int64)


@runtime_checkable
class Environment(Protocol):
    def reset(self, rng: TrajectoryRNG) -> np.ndarray: ...

    def step(self, states: np.ndarray, actions: np.ndarray, rng: TrajectoryRNG) -> tuple[np.ndarray, np.ndarray]: ...


@runtime_checkable
class Policy(Protocol):
    def act(self, states: np.ndarray, rng: TrajectoryRNG) -> np.ndarray: ...


def sample_trajectories(env: Environment, policy: Policy, h: int, rng: TrajectoryRNG) -> np.ndarray:
    """Roll out ``len(rng)`` trajectories of length ``h``; returns rewards of shape ``(len(rng), h)``."""
    if h < 1:
        raise ValueError("trajectory length must be at least 1")
    rewards = np.empty((len(rng), h))
    states = env.reset(rng)
    for t in range(h):
        actions = policy.act(states, rng)
        states, rewards[:, t] = env.step(states, actions, rng)
    return rewards


def sample_trajectory(env: Environment, policy: Policy, h: int, rng: np.random.Generator | TrajectoryRNG) -> np.ndarray:
    """Rewards ``R_0..R_{h-1}`` of a single rollout."""
    if isinstance(rng, np.random.Generator):
        rng = TrajectoryRNG([rng])
    if len(rng) != 1:
        raise ValueError("sample_trajectory takes a single stream")
    return sample_trajectories(env, policy, h, rng)[0]


def rollout(
    env: Environment,
    policy: Policy,
    lengths: np.ndarray,
    keys: Sequence[Sequence[int]],
) -> np.ndarray:
    """Simulate trajectories of the given lengths (non-increasing), trajectory ``i`` on stream ``keys[i]``.

    Returns zero-padded rewards of shape ``(len(lengths), max(lengths))``.
    """
    lengths = np.asarray(lengths, dtype=np.int64)
    if lengths.size == 0:
        return np.zeros((0, 0))
    if np.any(np.diff(lengths) > 0) or lengths[-1] < 1:
        raise ValueError("lengths must be positive and sorted longest first")
    if len(keys) != lengths.size:
        raise ValueError("need one stream key per trajectory")
    H = int(lengths[0])
    rewards = np.zeros((lengths.size, H))
    # live trajectories are always a prefix
    alive = np.searchsorted(-lengths, -np.arange(H), side="left")
    rng = TrajectoryRNG.from_key_list(keys)
    states = env.reset(rng)
    for t in range(H):
        k = int(alive[t])
        if k < len(rng):
            rng.keep(k)
            states = states[:k]
        actions = policy.act(states, rng)
        states, rewards[:k, t] = env.step(states, actions, rng)
    return rewards


def collect(
    env: Environment,
    policy: Policy,
    counts: DcsCounts,
    root: Sequence[int],
    start: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate every trajectory of a DCS, longest first.

    Trajectory ``j`` (in that order) uses stream ``root + (start + j,)``.
    Returns zero-padded rewards ``(N, T)`` and the lengths ``(N,)``.
    """
    T = counts.horizon
    lengths = counts.lengths()
    rewards = np.zeros((lengths.size, T))
    root = stream_key(root)
    keys = [root + (start + j,) for j in range(lengths.size)]
    out = rollout(env, policy, lengths, keys)
    rewards[:, : out.shape[1]] = out
    return rewards, lengths
