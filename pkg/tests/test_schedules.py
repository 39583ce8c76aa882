from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from truncmc.errors import IndivisibleBudget, UnsupportedDiscount
from truncmc.schedules import (
    RobustFallbackWarning,
    robust_allocation,
    robust_dcs,
    robust_log_weights,
    robust_threshold,
    robust_weights,
    uniform_dcs,
)


def weights_by_hand(g, T):
    return [g**t * (g**t + g ** (t + 1) - 2 * g**T) / (1 - g) for t in range(T)]


class TestUniform:
    def test_examples(self):
        assert uniform_dcs(10, 5).n == (2,) * 5
        assert uniform_dcs(4, 2).n == (2, 2)

    def test_indivisible(self):
        with pytest.raises(IndivisibleBudget):
            uniform_dcs(7, 2)


class TestRobustWeights:
    def test_examples(self):
        assert robust_weights(0.5, 2).tolist() == [2.0, 0.25]
        assert robust_weights(0.5, 1).tolist() == [1.0]

    @pytest.mark.parametrize("g", [0.1, 0.5, 0.9, 0.999])
    @pytest.mark.parametrize("T", [1, 2, 7, 40])
    def test_last_weight_and_formula(self, g, T):
        d = robust_weights(g, T)
        assert d[-1] == pytest.approx(g ** (2 * (T - 1)), rel=1e-9)
        np.testing.assert_allclose(d, weights_by_hand(g, T), rtol=1e-12)

    def test_strictly_decreasing_sweep(self):
        for g in np.linspace(0.01, 0.99, 50):
            for T in range(2, 101):
                log_d = robust_log_weights(g, T)
                assert np.all(np.isfinite(log_d)) and np.all(np.diff(log_d) < 0), (g, T)
                d = robust_weights(g, T)
                shown = d > 1e-300  # tiny weights underflow in linear scale
                np.testing.assert_allclose(np.log(d[shown]), log_d[shown], rtol=1e-9, atol=1e-9)

    @pytest.mark.parametrize("g", [0.0, 1.0, 1.2])
    def test_unsupported(self, g):
        with pytest.raises(UnsupportedDiscount):
            robust_weights(g, 3)


class TestRobustDcs:
    def test_example(self):
        assert robust_dcs(10, 2, 0.5).n == (8, 2)

    def test_continuous_example(self):
        # sqrt(d) = (sqrt 2, 0.5) normalised to 10
        root = np.array([math.sqrt(2), 0.5])
        np.testing.assert_allclose(robust_allocation(10, 2, 0.5), 10 * root / root.sum())

    def test_single_step(self):
        assert robust_dcs(37, 1, 0.4).n == (37,)

    def test_concentrates_early_for_small_gamma(self):
        n = robust_allocation(10_000, 10, 0.01)
        assert n[0] / n[9] > 100

    def test_fallback_below_threshold(self):
        with pytest.warns(RobustFallbackWarning):
            assert robust_dcs(20, 10, 0.5).n == (2,) * 10

    def test_threshold_keeps_last_step(self):
        g, T = 0.8, 12
        L = math.ceil(robust_threshold(g, T))
        assert robust_allocation(L, T, g)[-1] >= 1 - 1e-12

    def test_gamma_one(self):
        with pytest.raises(UnsupportedDiscount):
            robust_dcs(100, 10, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.05, 0.99), st.integers(2, 30), st.integers(0, 10**6))
    def test_proportional_and_exact(self, g, T, extra):
        L = math.ceil(robust_threshold(g, T)) + extra
        assume(L <= 10**9)
        n_bar = robust_allocation(L, T, g)
        root = np.sqrt(robust_weights(g, T))
        np.testing.assert_allclose(n_bar / n_bar[0], root / root[0], rtol=1e-9)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            n = robust_dcs(L, T, g)
        assert n.budget == L and n.n[-1] >= 1
        assert all(a >= b for a, b in zip(n.n, n.n[1:]))
