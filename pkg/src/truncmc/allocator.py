"""Per-phase budget allocation.

The allocation problem is

    minimise   sum_t f_t / n_t
    subject to sum_t n_t = b,  n_0 >= n_1 >= ... >= n_{T-1} >= 1.

Negative coefficients make the continuous relaxation non-convex. A negative
``f_y`` is pooled with the following steps up to the first index where the
running sum turns non-negative; the optimum is constant over such a run, so
the pooled problem has the same minimiser and only non-negative numerators.
The pooled problem is then solved exactly (square-root allocation, pool
adjacent violators for the ordering, clamping for the lower bound) and the
continuous result is rounded back to integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import DcsCumulative
from .errors import (
    BudgetMismatch,
    InfeasibleBudget,
    InstanceTooLarge,
    InvalidBeta,
)

__all__ = [
    "ExplorationBonuses",
    "Group",
    "GroupedProblem",
    "UniformFallback",
    "UNIFORM_FALLBACK",
    "ContinuousAllocation",
    "compute_bonuses",
    "empirical_surrogate",
    "group_partition",
    "solve_grouped",
    "round_allocation",
    "brute_force_oracle",
    "surrogate_value",
    "allocate",
]

ORACLE_MAX_HORIZON = 8
ORACLE_MAX_BUDGET = 40


@dataclass(frozen=True)
class ExplorationBonuses:
    """Optimistic inflation terms for the std (per step) and covariance (per pair) estimates."""

    std: np.ndarray
    cov: np.ndarray
    beta: float


def compute_bonuses(prior_counts: Sequence[int], beta: float) -> ExplorationBonuses:
    """Bonuses ``sqrt(2 log beta / N_t)`` for stds and ``3 sqrt(2 log beta / N_t')`` for covariances.

    ``prior_counts[t]`` is the number of samples already available at step ``t``.
    ``cov[t, t']`` is only populated for ``t < t'`` and depends on the count at ``t'``.
    """
    if not beta >= 1.0:
        raise InvalidBeta(f"beta must be >= 1, got {beta}")
    counts = np.asarray(prior_counts, dtype=float)
    if counts.ndim != 1 or counts.size == 0:
        raise ValueError("prior_counts must be a non-empty vector")
    if np.any(counts < 1):
        raise ValueError(f"every timestep needs at least one prior sample: {prior_counts}")
    T = counts.size
    log_beta = math.log(beta)
    std = np.sqrt(2.0 * log_beta / counts)
    cov = np.triu(np.broadcast_to(3.0 * std, (T, T)), k=1).copy()
    return ExplorationBonuses(std=std, cov=cov, beta=float(beta))


def empirical_surrogate(
    stds: Sequence[float],
    covs: np.ndarray,
    bonuses: ExplorationBonuses | None,
    gamma: float,
) -> np.ndarray:
    """Optimistic surrogate coefficients built from estimated moments.

    ``covs`` is read above the diagonal only. The result may contain negative
    entries when estimated covariances are negative.
    """
    stds = np.asarray(stds, dtype=float)
    if np.any(stds < 0):
        raise ValueError("standard deviations must be non-negative")
    T = stds.size
    covs = np.triu(np.asarray(covs, dtype=float).reshape(T, T), k=1)
    if bonuses is not None:
        stds = stds + bonuses.std
        covs = covs + np.triu(bonuses.cov, k=1)
    disc = gamma ** np.arange(T, dtype=float)
    return disc**2 * stds**2 + 2.0 * disc * (covs @ disc)


@dataclass(frozen=True)
class Group:
    start: int
    length: int
    numerator: float

    @property
    def stop(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class GroupedProblem:
    """Contiguous groups of timesteps sharing one allocation variable."""

    groups: tuple[Group, ...]
    budget: int | None = None
    merged_tail: bool = False

    @property
    def horizon(self) -> int:
        return sum(g.length for g in self.groups)

    def with_budget(self, budget: int) -> "GroupedProblem":
        return GroupedProblem(self.groups, int(budget), self.merged_tail)


class UniformFallback:
    """Returned when a negative coefficient at step 0 can never be offset."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNIFORM_FALLBACK"


UNIFORM_FALLBACK = UniformFallback()


def group_partition(
    f: Sequence[float], budget: int | None = None
) -> Union[GroupedProblem, UniformFallback]:
    """Pool every negative coefficient with its successors until the running sum is >= 0.

    If some negative run never recovers: at step 0 the caller must use the
    uniform allocation (``UNIFORM_FALLBACK``); later on, the whole tail is merged
    with the group holding the preceding step, and the merged group keeps only
    that group's numerator.
    """
    f = np.asarray(f, dtype=float)
    T = f.size
    groups: list[Group] = []
    t = 0
    while t < T:
        if f[t] >= 0:
            groups.append(Group(t, 1, float(f[t])))
            t += 1
            continue
        total = f[t]
        q = t
        while total < 0 and q + 1 < T:
            q += 1
            total += f[q]
        if total >= 0:
            groups.append(Group(t, q - t + 1, float(total)))
            t = q + 1
            continue
        # ill-conditioned: no prefix of f[t:] sums to >= 0
        if t == 0:
            return UNIFORM_FALLBACK
        prev = groups.pop()
        groups.append(Group(prev.start, T - prev.start, prev.numerator))
        return GroupedProblem(tuple(groups), budget, merged_tail=True)
    return GroupedProblem(tuple(groups), budget)


@dataclass(frozen=True)
class ContinuousAllocation:
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def total(self) -> float:
        return float(self.values.sum())


def _pool_adjacent_violators(numerators: list[float], lengths: list[int]):
    """Merge neighbouring blocks until the per-step ratios are non-increasing."""
    blocks: list[list] = []  # [numerator, length, first group, last group]
    for g, (F, l) in enumerate(zip(numerators, lengths)):
        blocks.append([F, l, g, g])
        while len(blocks) > 1 and blocks[-2][0] * blocks[-1][1] < blocks[-1][0] * blocks[-2][1]:
            F2, l2, _, last = blocks.pop()
            blocks[-1][0] += F2
            blocks[-1][1] += l2
            blocks[-1][3] = last
    return blocks


def solve_grouped(p: GroupedProblem, budget: int | None = None) -> ContinuousAllocation:
    """Exact minimiser of ``sum_g F_g / y_g`` s.t. ``sum_g l_g y_g = b``, ``y`` non-increasing, ``y >= 1``.

    For a fixed budget multiplier the stationary point of each block is
    ``sqrt(F/l)`` times a common scale, so ordering violations are resolved by
    pooling blocks on their ratios ``F/l``. The scale is then found by scanning
    how many leading blocks sit above the lower bound of 1.
    """
    if isinstance(p, UniformFallback):
        raise TypeError("UNIFORM_FALLBACK has no grouped problem to solve")
    b = p.budget if budget is None else budget
    if b is None:
        raise ValueError("no budget given")
    T = p.horizon
    if b < T:
        raise InfeasibleBudget(f"budget {b} cannot give every one of {T} steps a sample")
    nums = [g.numerator for g in p.groups]
    if any(F < 0 for F in nums):
        raise ValueError("grouped numerators must be non-negative")
    blocks = _pool_adjacent_violators(nums, [g.length for g in p.groups])
    F = np.array([blk[0] for blk in blocks], dtype=float)
    L = np.array([blk[1] for blk in blocks], dtype=float)
    s = np.sqrt(F / L)

    y = np.ones(len(blocks))
    # active blocks (y > 1) form a prefix since s is non-increasing
    for k in range(len(blocks), 0, -1):
        if s[k - 1] <= 0:
            continue
        rest = float(L[k:].sum())
        scale = (b - rest) / float((L[:k] * s[:k]).sum())
        if scale * s[k - 1] >= 1.0 and (k == len(blocks) or scale * s[k] <= 1.0):
            y[:k] = scale * s[:k]
            break
    else:
        # all numerators vanish; spend the surplus evenly
        y += (b - T) / T

    values = np.empty(T)
    for blk, yb in zip(blocks, y):
        first, last = p.groups[blk[2]], p.groups[blk[3]]
        values[first.start : last.stop] = yb
    return ContinuousAllocation(values)


def round_allocation(alloc: ContinuousAllocation | Sequence[float], budget: int) -> DcsCumulative:
    """Floor every entry, then add one sample to each of the first ``k`` steps.

    ``k`` is the budget left over after flooring, so the result is budget-exact
    and stays monotone.
    """
    values = alloc.values if isinstance(alloc, ContinuousAllocation) else np.asarray(alloc, float)
    if abs(values.sum() - budget) > 0.5:
        raise BudgetMismatch(f"allocation sums to {values.sum():.6g}, budget is {budget}")
    nearest = np.rint(values)
    snapped = np.where(np.abs(values - nearest) < 1e-9, nearest, values)
    floors = np.floor(snapped).astype(np.int64)
    k = int(budget - floors.sum())
    if not 0 <= k <= floors.size:
        raise BudgetMismatch(f"rounding left {k} samples for {floors.size} steps")
    floors[:k] += 1
    return DcsCumulative(tuple(int(v) for v in floors))


def surrogate_value(f: Sequence[float], n: Sequence[float] | DcsCumulative) -> float:
    """``sum_t f_t / n_t`` for integer or continuous ``n``."""
    n = n.array() if isinstance(n, DcsCumulative) else np.asarray(n, dtype=float)
    return float(np.sum(np.asarray(f, dtype=float) / n))


def _monotone_vectors(T: int, budget: int):
    def rec(prefix: list[int], left: int, cap: int):
        slots = T - len(prefix)
        if slots == 0:
            yield tuple(prefix)
            return
        for v in range(min(cap, left - (slots - 1)), 0, -1):
            prefix.append(v)
            yield from rec(prefix, left - v, v)
            prefix.pop()

    yield from rec([], budget, budget)


def brute_force_oracle(
    f: Sequence[float], budget: int, T: int | None = None
) -> tuple[DcsCumulative, float]:
    """Exhaustive integer minimiser of ``sum_t f_t / n_t`` over monotone ``n >= 1`` with ``sum n <= budget``.

    Ties go to the lexicographically largest ``n``.
    """
    f = np.asarray(f, dtype=float)
    T = f.size if T is None else T
    if f.size != T:
        raise ValueError(f"expected {T} coefficients, got {f.size}")
    if T > ORACLE_MAX_HORIZON or budget > ORACLE_MAX_BUDGET:
        raise InstanceTooLarge(
            f"enumeration is limited to T <= {ORACLE_MAX_HORIZON}, budget <= {ORACLE_MAX_BUDGET}"
        )
    if budget < T:
        raise InfeasibleBudget(f"budget {budget} < horizon {T}")
    cands = np.array(list(_monotone_vectors(T, budget)), dtype=float)
    values = (f / cands).sum(axis=1)
    best = values.min()
    tol = 1e-12 * max(1.0, abs(best))
    # generated in lexicographically decreasing order, so the first hit wins ties
    idx = int(np.flatnonzero(values <= best + tol)[0])
    n = DcsCumulative(tuple(int(v) for v in cands[idx]))
    return n, float(values[idx])


def allocate(f: Sequence[float], budget: int) -> tuple[DcsCumulative, bool]:
    """Group, solve and round one phase; returns the DCS and whether the uniform fallback fired."""
    f = np.asarray(f, dtype=float)
    T = f.size
    problem = group_partition(f, budget)
    if isinstance(problem, UniformFallback):
        if budget % T:
            raise InfeasibleBudget(f"uniform fallback needs budget divisible by {T}")
        return DcsCumulative((budget // T,) * T), True
    return round_allocation(solve_grouped(problem), budget), False
