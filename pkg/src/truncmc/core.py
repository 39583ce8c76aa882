"""Data collection strategy (DCS) representations.

A DCS can be written two ways for a horizon ``T``:

* counts ``m``: ``m[h-1]`` trajectories of length ``h`` for ``h = 1..T``;
* cumulative ``n``: ``n[t]`` reward samples at timestep ``t`` for ``t = 0..T-1``.

They are linked by ``n[T-1] = m[T-1]`` and ``n[t] = n[t+1] + m[t]`` (0-based
``m``). ``n`` is the canonical form used by every objective in the package;
``m`` only appears when trajectories are actually simulated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import MonotonicityViolation

__all__ = [
    "DcsCounts",
    "DcsCumulative",
    "EvalTask",
    "cumulative_from_counts",
    "counts_from_cumulative",
    "validate_budget",
]


def _as_int_tuple(values: Sequence[int]) -> tuple[int, ...]:
    out = []
    for v in values:
        iv = int(v)
        if iv != v:
            raise ValueError(f"DCS entries must be integers, got {v!r}")
        out.append(iv)
    return tuple(out)


@dataclass(frozen=True)
class DcsCounts:
    """Trajectories per length; ``m[h-1]`` is the number of length-``h`` rollouts."""

    m: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "m", _as_int_tuple(self.m))
        if not self.m:
            raise ValueError("a DCS needs a horizon of at least 1")
        if any(v < 0 for v in self.m):
            raise ValueError(f"trajectory counts must be non-negative: {self.m}")

    @property
    def horizon(self) -> int:
        return len(self.m)

    @property
    def budget(self) -> int:
        return sum(h * c for h, c in enumerate(self.m, start=1))

    @property
    def num_trajectories(self) -> int:
        return sum(self.m)

    def lengths(self) -> np.ndarray:
        """Trajectory lengths, longest first."""
        hs = np.arange(self.horizon, 0, -1)
        return np.repeat(hs, self.m[::-1])


@dataclass(frozen=True)
class DcsCumulative:
    """Samples per timestep; always monotone non-increasing."""

    n: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "n", _as_int_tuple(self.n))
        if not self.n:
            raise ValueError("a DCS needs a horizon of at least 1")
        if any(v < 0 for v in self.n):
            raise ValueError(f"sample counts must be non-negative: {self.n}")
        for t in range(len(self.n) - 1):
            if self.n[t] < self.n[t + 1]:
                raise MonotonicityViolation(
                    f"n[{t}]={self.n[t]} < n[{t + 1}]={self.n[t + 1]}"
                )

    @property
    def horizon(self) -> int:
        return len(self.n)

    @property
    def budget(self) -> int:
        return sum(self.n)

    def array(self) -> np.ndarray:
        return np.asarray(self.n, dtype=np.int64)

    def __add__(self, other: "DcsCumulative") -> "DcsCumulative":
        if self.horizon != other.horizon:
            raise ValueError("cannot add DCSs with different horizons")
        return DcsCumulative(tuple(a + b for a, b in zip(self.n, other.n)))


@dataclass(frozen=True)
class EvalTask:
    """An environment/policy pair evaluated over horizon ``horizon`` with discount ``gamma``."""

    env: object
    policy: object
    horizon: int
    gamma: float
    name: str = ""

    def __post_init__(self) -> None:
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")


CumulativeLike = Union[DcsCumulative, Sequence[int]]


def cumulative_from_counts(m: DcsCounts) -> DcsCumulative:
    # n_t = sum_{h > t} m_h, i.e. a reversed cumulative sum
    n = np.cumsum(np.asarray(m.m, dtype=np.int64)[::-1])[::-1]
    return DcsCumulative(tuple(int(v) for v in n))


def counts_from_cumulative(n: CumulativeLike) -> DcsCounts:
    values = n.n if isinstance(n, DcsCumulative) else _as_int_tuple(n)
    if not values:
        raise ValueError("a DCS needs a horizon of at least 1")
    for t in range(len(values) - 1):
        if values[t] < values[t + 1]:
            raise MonotonicityViolation(
                f"n[{t}]={values[t]} < n[{t + 1}]={values[t + 1]}"
            )
    if values[-1] < 0:
        raise ValueError(f"sample counts must be non-negative: {values}")
    m = [values[t] - values[t + 1] for t in range(len(values) - 1)]
    m.append(values[-1])
    return DcsCounts(tuple(m))


def validate_budget(n: CumulativeLike, budget: int) -> bool:
    """True iff ``n`` spends exactly ``budget``, is monotone and keeps one full trajectory."""
    values = n.n if isinstance(n, DcsCumulative) else tuple(n)
    if not values:
        return False
    if any(int(v) != v or v < 0 for v in values):
        return False
    if any(values[t] < values[t + 1] for t in range(len(values) - 1)):
        return False
    return sum(values) == budget and values[-1] >= 1
