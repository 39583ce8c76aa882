"""Truncated-trajectory return estimator and reward-moment estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import DcsCumulative
from .errors import (
    InconsistentDataset,
    InsufficientSamples,
    InvalidMoments,
    UnsupportedDiscount,
    ZeroAllocation,
)
from .schedules import robust_weights

__all__ = [
    "RewardDataset",
    "estimate_return",
    "empirical_std",
    "empirical_cov",
    "reward_moments",
    "exact_surrogate",
    "deterministic_variance",
    "hoeffding_width",
]


@dataclass
class RewardDataset:
    """Reward sequences of trajectories with possibly different lengths.

    Row ``i`` of ``rewards`` holds trajectory ``i`` zero-padded to the horizon;
    ``lengths[i]`` says how many entries are real. Rows are only ever appended.
    """

    horizon: int
    rewards: np.ndarray = field(default=None)
    lengths: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        if self.rewards is None:
            self.rewards = np.zeros((0, self.horizon))
            self.lengths = np.zeros(0, dtype=np.int64)
        self.rewards = np.asarray(self.rewards, dtype=float).reshape(-1, self.horizon)
        self.lengths = np.asarray(self.lengths, dtype=np.int64)
        if self.lengths.shape != (self.rewards.shape[0],):
            raise ValueError("need one length per trajectory")
        if np.any((self.lengths < 1) | (self.lengths > self.horizon)):
            raise ValueError("trajectory lengths must lie in [1, horizon]")
        mask = np.arange(self.horizon) < self.lengths[:, None]
        self.rewards = np.where(mask, self.rewards, 0.0)

    @classmethod
    def from_sequences(cls, horizon: int, sequences: Sequence[Sequence[float]]) -> "RewardDataset":
        data = cls(horizon)
        for seq in sequences:
            data.append(np.asarray(seq, dtype=float)[None, :], len(seq))
        return data

    def append(self, rewards: np.ndarray, length: int | Sequence[int]) -> None:
        """Add a batch of trajectories (``rewards`` has shape ``(k, length)`` or ``(k, horizon)``)."""
        rewards = np.atleast_2d(np.asarray(rewards, dtype=float))
        k = rewards.shape[0]
        lengths = np.broadcast_to(np.asarray(length, dtype=np.int64), (k,))
        padded = np.zeros((k, self.horizon))
        width = min(rewards.shape[1], self.horizon)
        padded[:, :width] = rewards[:, :width]
        extra = RewardDataset(self.horizon, padded, lengths.copy())
        self.rewards = np.vstack([self.rewards, extra.rewards])
        self.lengths = np.concatenate([self.lengths, extra.lengths])

    def __len__(self) -> int:
        return self.lengths.size

    def mask(self) -> np.ndarray:
        return np.arange(self.horizon) < self.lengths[:, None]

    def counts(self) -> np.ndarray:
        """Samples available at each timestep."""
        return np.bincount(self.lengths, minlength=self.horizon + 1)[::-1].cumsum()[::-1][1:]

    def samples(self, t: int) -> np.ndarray:
        return self.rewards[self.lengths > t, t]

    def paired(self, t: int, t2: int) -> np.ndarray:
        """``(R_t, R_t2)`` for every trajectory long enough to reach ``max(t, t2)``."""
        rows = self.lengths > max(t, t2)
        return np.column_stack([self.rewards[rows, t], self.rewards[rows, t2]])


def estimate_return(data: RewardDataset, n: DcsCumulative | Sequence[int], gamma: float) -> float:
    """Each reward at step ``t`` is discounted and divided by the number of samples at ``t``."""
    n_arr = n.array() if isinstance(n, DcsCumulative) else np.asarray(n, dtype=np.int64)
    counts = data.counts()
    if n_arr.shape != counts.shape or np.any(n_arr != counts):
        raise InconsistentDataset(f"dataset has counts {counts.tolist()}, DCS says {n_arr.tolist()}")
    if n_arr[-1] < 1:
        raise InconsistentDataset("the estimator needs at least one full-length trajectory")
    disc = gamma ** np.arange(data.horizon, dtype=float)
    return float(np.sum(disc * data.rewards.sum(axis=0) / n_arr))


def empirical_std(samples: Sequence[float]) -> float:
    """Square root of the unbiased sample variance (the pairwise-difference U-statistic)."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {x.size}")
    return float(np.sqrt(max(np.var(x, ddof=1), 0.0)))


def empirical_cov(samples_t: Sequence[float], paired: Sequence[tuple[float, float]]) -> float:
    """Plug-in covariance between an earlier step ``t`` and a later step ``t'``.

    The cross moment and the ``t'`` mean use the trajectories reaching ``t'``
    (``paired``); the ``t`` mean uses every sample at ``t``.
    """
    pairs = np.asarray(paired, dtype=float).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise InsufficientSamples("no trajectory reaches the later timestep")
    x = np.asarray(samples_t, dtype=float)
    return float(np.mean(pairs[:, 0] * pairs[:, 1]) - x.mean() * pairs[:, 1].mean())


def reward_moments(data: RewardDataset) -> tuple[np.ndarray, np.ndarray]:
    """Per-step standard deviations and the strictly upper-triangular covariance matrix.

    Same estimators as :func:`empirical_std` / :func:`empirical_cov`, computed
    for all steps at once. Steps with fewer than two samples get std 0 and
    pairs whose later step has no sample get covariance 0.
    """
    T = data.horizon
    counts = data.counts().astype(float)
    safe = np.maximum(counts, 1.0)
    Z = data.rewards
    means = Z.sum(axis=0) / safe
    centred = np.where(data.mask(), Z - means, 0.0)
    ss = (centred**2).sum(axis=0)
    var = np.where(counts >= 2, ss / np.maximum(counts - 1.0, 1.0), 0.0)
    stds = np.sqrt(var)

    # padding is zero, so column products only pick up trajectories reaching both steps
    cross = Z.T @ Z
    covs = cross / safe[None, :] - np.outer(means, means)
    covs = np.where(counts[None, :] >= 1, covs, 0.0)
    return stds, np.triu(covs, k=1)


def exact_surrogate(variances: Sequence[float], covariances: np.ndarray, gamma: float) -> np.ndarray:
    """``f_t = g^2t Var(R_t) + 2 sum_{t'>t} g^(t+t') Cov(R_t, R_t')``."""
    var = np.asarray(variances, dtype=float)
    if np.any(var < 0):
        raise InvalidMoments(f"variances must be non-negative: {var}")
    T = var.size
    cov = np.triu(np.asarray(covariances, dtype=float).reshape(T, T), k=1)
    disc = gamma ** np.arange(T, dtype=float)
    return disc**2 * var + 2.0 * disc * (cov @ disc)


def deterministic_variance(f: Sequence[float], n: DcsCumulative | Sequence[float]) -> float:
    """Variance (= MSE) of the estimator for a DCS fixed before collecting data."""
    n_arr = n.array() if isinstance(n, DcsCumulative) else np.asarray(n, dtype=float)
    if np.any(n_arr <= 0):
        raise ZeroAllocation("every timestep needs at least one sample")
    return float(np.sum(np.asarray(f, dtype=float) / n_arr))


def hoeffding_width(
    n: DcsCumulative | Sequence[float], gamma: float, delta: float, T: int | None = None
) -> float:
    """Half-width of the ``1 - delta`` confidence interval for rewards in ``[0, 1]``."""
    if gamma >= 1.0:
        raise UnsupportedDiscount("the confidence width needs gamma < 1")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    n_arr = n.array() if isinstance(n, DcsCumulative) else np.asarray(n, dtype=float)
    T = n_arr.size if T is None else T
    if n_arr.size != T:
        raise ValueError(f"expected {T} counts, got {n_arr.size}")
    if np.any(n_arr < 1):
        raise ZeroAllocation("every timestep needs at least one sample")
    d = robust_weights(gamma, T)
    return math.sqrt(0.5 * math.log(2.0 / delta) * float(np.sum(d / n_arr)))
