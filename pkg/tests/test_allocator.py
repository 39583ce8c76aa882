from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from truncmc.allocator import (
    UNIFORM_FALLBACK,
    ContinuousAllocation,
    Group,
    GroupedProblem,
    allocate,
    brute_force_oracle,
    compute_bonuses,
    empirical_surrogate,
    group_partition,
    round_allocation,
    solve_grouped,
    surrogate_value,
)
from truncmc.errors import BudgetMismatch, InfeasibleBudget, InstanceTooLarge, InvalidBeta
from truncmc.estimator import exact_surrogate


def singletons(*F):
    return GroupedProblem(tuple(Group(t, 1, float(v)) for t, v in enumerate(F)))


def slsqp_optimum(f, budget):
    """Local NLP solve of the continuous problem in n-space (non-negative f only)."""
    f = np.asarray(f, float)
    T = f.size
    cons = [{"type": "eq", "fun": lambda n: n.sum() - budget}]
    cons += [{"type": "ineq", "fun": lambda n, t=t: n[t] - n[t + 1]} for t in range(T - 1)]
    best = math.inf
    for x0 in (np.full(T, budget / T), np.linspace(2, 1, T) * budget / np.linspace(2, 1, T).sum()):
        res = minimize(
            lambda n: np.sum(f / n),
            x0,
            jac=lambda n: -f / n**2,
            bounds=[(1.0, budget)] * T,
            constraints=cons,
            method="SLSQP",
            options={"ftol": 1e-14, "maxiter": 500},
        )
        if res.success:
            best = min(best, float(np.sum(f / res.x)))
    return best


class TestBonuses:
    def test_beta_one_is_zero(self):
        b = compute_bonuses([3, 5, 9], 1.0)
        assert not b.std.any() and not b.cov.any()

    def test_values(self):
        b = compute_bonuses([8, 2], math.e)
        assert b.std[0] == pytest.approx(0.5)
        assert b.cov[0, 1] == pytest.approx(3.0)
        assert b.cov[1, 0] == 0.0

    def test_cov_depends_on_later_count(self):
        b = compute_bonuses([50, 8, 2], 7.0)
        assert b.cov[0, 2] == b.cov[1, 2] == pytest.approx(3 * math.sqrt(2 * math.log(7.0) / 2))

    def test_invalid_beta(self):
        with pytest.raises(InvalidBeta):
            compute_bonuses([2, 2], 0.5)

    def test_needs_samples(self):
        with pytest.raises(ValueError):
            compute_bonuses([2, 0], 2.0)


class TestEmpiricalSurrogate:
    def test_matches_exact_without_bonus(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(5, 5))
        S = A @ A.T
        f = exact_surrogate(np.diag(S), np.triu(S, 1), 0.9)
        b = compute_bonuses([10] * 5, 1.0)
        np.testing.assert_allclose(empirical_surrogate(np.sqrt(np.diag(S)), S, b, 0.9), f, rtol=1e-12)

    def test_examples(self):
        from truncmc.allocator import ExplorationBonuses

        b = ExplorationBonuses(np.array([0.5]), np.zeros((1, 1)), math.e)
        assert empirical_surrogate([0.5], np.zeros((1, 1)), b, 1.0).tolist() == [1.0]
        covs = np.array([[0.0, -1.0], [0.0, 0.0]])
        assert empirical_surrogate([0.0, 0.0], covs, None, 1.0).tolist() == [-2.0, 0.0]

    def test_bonus_inflates(self):
        stds, covs = np.array([1.0, 0.5]), np.array([[0, 0.1], [0, 0]])
        plain = empirical_surrogate(stds, covs, None, 0.9)
        inflated = empirical_surrogate(stds, covs, compute_bonuses([4, 4], 3.0), 0.9)
        assert np.all(inflated > plain)


class TestGroupPartition:
    @staticmethod
    def spans(p):
        return [(g.start, g.length, g.numerator) for g in p.groups]

    def test_examples(self):
        assert self.spans(group_partition([-1, 2, 3])) == [(0, 2, 1.0), (2, 1, 3.0)]
        assert self.spans(group_partition([-3, 2, 2])) == [(0, 3, 1.0)]
        merged = group_partition([1, -2])
        assert self.spans(merged) == [(0, 2, 1.0)] and merged.merged_tail
        assert group_partition([-1, 0.5]) is UNIFORM_FALLBACK

    def test_non_negative_is_singletons(self):
        assert self.spans(group_partition([1, 0, 2])) == [(0, 1, 1.0), (1, 1, 0.0), (2, 1, 2.0)]

    def test_merge_keeps_preceding_group(self):
        # the group before the bad tail is itself pooled
        p = group_partition([5, -1, 2, -4, 1])
        assert self.spans(p) == [(0, 1, 5.0), (1, 4, 1.0)]

    @settings(max_examples=300)
    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=10))
    def test_partition_properties(self, f):
        p = group_partition(f)
        if p is UNIFORM_FALLBACK:
            assert f[0] < 0 and all(sum(f[: q + 1]) < 0 for q in range(len(f)))
            return
        stop = 0
        for g in p.groups:
            assert g.start == stop and g.length >= 1
            stop = g.stop
            assert g.numerator >= 0
        assert stop == len(f)
        if not p.merged_tail:
            for g in p.groups:
                assert g.numerator == pytest.approx(sum(f[g.start : g.stop]), abs=1e-9)


class TestSolveGrouped:
    def test_single_group(self):
        p = GroupedProblem((Group(0, 4, 3.0),))
        assert solve_grouped(p, 12).values.tolist() == [3.0] * 4

    @pytest.mark.parametrize(
        "F, b, y",
        [((1, 1), 4, (2, 2)), ((4, 1), 6, (4, 2)), ((0, 1), 10, (5, 5))],
    )
    def test_examples(self, F, b, y):
        np.testing.assert_allclose(solve_grouped(singletons(*F), b).values, y)

    def test_lower_bound_binds(self):
        y = solve_grouped(singletons(100, 0, 0), 10).values
        np.testing.assert_allclose(y, (8, 1, 1))

    def test_all_zero_spreads_evenly(self):
        np.testing.assert_allclose(solve_grouped(singletons(0, 0, 0), 9).values, (3, 3, 3))

    def test_infeasible(self):
        with pytest.raises(InfeasibleBudget):
            solve_grouped(singletons(1, 1, 1), 2)

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.floats(0, 10), min_size=1, max_size=6), st.integers(0, 60))
    def test_against_slsqp(self, f, extra):
        T = len(f)
        b = T + extra
        y = solve_grouped(group_partition(f), b).values
        assert y.sum() == pytest.approx(b, abs=1e-9)
        assert np.all(np.diff(y) <= 1e-12) and np.all(y >= 1 - 1e-12)
        ref = slsqp_optimum(f, b)
        mine = surrogate_value(f, y)
        assert mine <= ref + 1e-7 * max(1.0, ref)
        assert mine == pytest.approx(ref, rel=1e-5, abs=1e-9)

    @pytest.mark.parametrize("seed", range(30))
    def test_mixed_sign_against_grid(self, seed):
        # two-step problems are one-dimensional: scan n_0 on a fine grid
        rng = np.random.default_rng(seed)
        f1 = rng.uniform(0.1, 3)
        f0 = rng.uniform(-f1, 3)
        b = int(rng.integers(2, 30))
        grid = np.linspace(b / 2, b - 1, 200_001)
        ref = np.min(f0 / grid + f1 / (b - grid))
        mine = surrogate_value((f0, f1), solve_grouped(group_partition((f0, f1)), b).values)
        assert mine <= ref + 1e-9
        assert mine == pytest.approx(ref, rel=1e-6, abs=1e-9)

    @settings(max_examples=100)
    @given(st.lists(st.floats(0.01, 10), min_size=1, max_size=8))
    def test_scaling(self, f):
        p = group_partition(f)
        T = len(f)
        b = 50 * T
        y1 = solve_grouped(p, b).values
        y2 = solve_grouped(p, 2 * b).values
        if np.all(y1 > 1 + 1e-9):
            np.testing.assert_allclose(y2, 2 * y1, rtol=1e-9)
            assert surrogate_value(f, y2) == pytest.approx(surrogate_value(f, y1) / 2)

    @settings(max_examples=100)
    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=8), st.integers(0, 40))
    def test_uniform_within_groups(self, f, extra):
        p = group_partition(f)
        if p is UNIFORM_FALLBACK:
            return
        y = solve_grouped(p, len(f) + extra).values
        for g in p.groups:
            assert np.all(y[g.start : g.stop] == y[g.start])


class TestRounding:
    @pytest.mark.parametrize(
        "x, b, n",
        [((2.5, 2.5, 1.0), 6, (3, 2, 1)), ((4.0, 3.0, 1.0), 8, (4, 3, 1)), ((1.5, 1.5), 3, (2, 1))],
    )
    def test_examples(self, x, b, n):
        assert round_allocation(ContinuousAllocation(np.array(x)), b).n == n

    def test_snaps_near_integers(self):
        assert round_allocation([3.0000000000001, 2.9999999999999], 6).n == (3, 3)

    def test_mismatch(self):
        with pytest.raises(BudgetMismatch):
            round_allocation([2.0, 2.0], 5)

    @settings(max_examples=200)
    @given(st.lists(st.floats(0, 5), min_size=1, max_size=8), st.integers(0, 50))
    def test_rounded_is_valid(self, f, extra):
        b = len(f) + extra
        n = round_allocation(solve_grouped(group_partition(f), b), b)
        assert n.budget == b and n.n[-1] >= 1
        assert all(a >= c for a, c in zip(n.n, n.n[1:]))


class TestOracle:
    @pytest.mark.parametrize(
        "f, b, n, value",
        [((1, 0, 0), 6, (4, 1, 1), 0.25), ((0, 0, 1), 6, (2, 2, 2), 0.5), ((1, 1), 4, (2, 2), 1.0)],
    )
    def test_examples(self, f, b, n, value):
        got, v = brute_force_oracle(f, b)
        assert got.n == n and v == pytest.approx(value)

    def test_ties_prefer_early_steps(self):
        assert brute_force_oracle((0, 0), 4)[0].n == (3, 1)

    def test_budget_may_be_left_unused(self):
        # a negative coefficient prefers few samples
        n, v = brute_force_oracle((1, -0.5), 10)
        assert n.budget <= 10 and v == pytest.approx(min(1 / a - 0.5 / c for a in range(1, 10) for c in range(1, a + 1) if a + c <= 10))

    def test_too_large(self):
        with pytest.raises(InstanceTooLarge):
            brute_force_oracle([1] * 9, 20)
        with pytest.raises(InstanceTooLarge):
            brute_force_oracle([1, 1], 41)

    def test_continuous_lower_bounds_integer(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            T = int(rng.integers(1, 6))
            f = rng.exponential(size=T)
            b = int(rng.integers(T, 26))
            cont = surrogate_value(f, solve_grouped(group_partition(f), b).values)
            assert cont <= brute_force_oracle(f, b)[1] + 1e-9


class TestAllocate:
    def test_fallback(self):
        n, fell_back = allocate([-1, 0.5], 10)
        assert fell_back and n.n == (5, 5)

    def test_regular(self):
        n, fell_back = allocate([4, 1], 6)
        assert not fell_back and n.n == (4, 2)
