"""Pre-determined data collection strategies: uniform and discount-driven robust."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .allocator import round_allocation
from .core import DcsCumulative
from .errors import IndivisibleBudget, UnsupportedDiscount

__all__ = [
    "uniform_dcs",
    "robust_weights",
    "robust_log_weights",
    "robust_threshold",
    "robust_allocation",
    "robust_dcs",
    "RobustFallbackWarning",
]


class RobustFallbackWarning(RuntimeWarning):
    """Budget below the closed-form regime; the uniform schedule was used instead."""


def uniform_dcs(budget: int, T: int) -> DcsCumulative:
    """``budget / T`` full-length trajectories."""
    if T < 1:
        raise ValueError("horizon must be positive")
    if budget % T:
        raise IndivisibleBudget(f"budget {budget} is not a multiple of horizon {T}")
    return DcsCumulative((budget // T,) * T)


def robust_log_weights(gamma: float, T: int) -> np.ndarray:
    """``log d_t``, finite even where ``d_t`` itself underflows.

    Uses ``d_t = g^(2t) (1 + g - 2 g^(T-t)) / (1 - g)``, where the middle
    factor is at least ``1 - g``.
    """
    if not 0.0 < gamma < 1.0:
        raise UnsupportedDiscount(f"robust weights need 0 < gamma < 1, got {gamma}")
    if T < 1:
        raise ValueError("horizon must be positive")
    t = np.arange(T, dtype=float)
    return 2.0 * t * math.log(gamma) + np.log1p(gamma - 2.0 * gamma ** (T - t)) - math.log1p(-gamma)


def robust_weights(gamma: float, T: int) -> np.ndarray:
    """Per-step weights ``d_t = g^t (g^t + g^(t+1) - 2 g^T) / (1 - g)`` of the Hoeffding-type width."""
    if not 0.0 < gamma < 1.0:
        raise UnsupportedDiscount(f"robust weights need 0 < gamma < 1, got {gamma}")
    if T < 1:
        raise ValueError("horizon must be positive")
    g = gamma ** np.arange(T, dtype=float)
    return g * (g + gamma * g - 2.0 * gamma**T) / (1.0 - gamma)


def _root_ratios(gamma: float, T: int) -> np.ndarray:
    # sqrt(d_t / d_0), computed without underflow in the leading entries
    log_d = robust_log_weights(gamma, T)
    return np.exp(0.5 * (log_d - log_d[0]))


def robust_threshold(gamma: float, T: int) -> float:
    """Smallest budget for which the square-root allocation keeps one sample at the last step."""
    log_d = robust_log_weights(gamma, T)
    with np.errstate(over="ignore"):
        return float(np.exp(0.5 * (log_d - log_d[-1])).sum())


def robust_allocation(budget: int, T: int, gamma: float) -> np.ndarray:
    """Continuous allocation ``n_t`` proportional to ``sqrt(d_t)``, summing to ``budget``."""
    root = _root_ratios(gamma, T)
    return budget * root / root.sum()


def robust_dcs(budget: int, T: int, gamma: float) -> DcsCumulative:
    """Integer robust schedule; falls back to :func:`uniform_dcs` below :func:`robust_threshold`."""
    if not 0.0 < gamma < 1.0:
        raise UnsupportedDiscount(f"the robust schedule is undefined for gamma={gamma}")
    if T == 1:
        return DcsCumulative((budget,))
    if budget < robust_threshold(gamma, T):
        warnings.warn(
            f"budget {budget} is below the robust threshold {robust_threshold(gamma, T):.1f}; "
            "using the uniform schedule",
            RobustFallbackWarning,
            stacklevel=2,
        )
        return uniform_dcs(budget, T)
    return round_allocation(robust_allocation(budget, T, gamma), budget)
