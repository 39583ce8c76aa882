"""Exception hierarchy shared across the package."""

from __future__ import annotations


class TruncMCError(Exception):
    """Base class for all package errors."""


class MonotonicityViolation(TruncMCError, ValueError):
    pass


class InconsistentDataset(TruncMCError, ValueError):
    pass


class InsufficientSamples(TruncMCError, ValueError):
    pass


class InvalidMoments(TruncMCError, ValueError):
    pass


class ZeroAllocation(TruncMCError, ValueError):
    pass


class UnsupportedDiscount(TruncMCError, ValueError):
    pass


class IndivisibleBudget(TruncMCError, ValueError):
    pass


class InvalidBeta(TruncMCError, ValueError):
    pass


class InfeasibleBudget(TruncMCError, ValueError):
    pass


class BudgetMismatch(TruncMCError, ValueError):
    pass


class InstanceTooLarge(TruncMCError, ValueError):
    pass


class ConfigInvalid(TruncMCError, ValueError):
    pass
