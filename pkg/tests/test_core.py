from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from truncmc.core import (
    DcsCounts,
    DcsCumulative,
    EvalTask,
    counts_from_cumulative,
    cumulative_from_counts,
    validate_budget,
)
from truncmc.errors import MonotonicityViolation


@pytest.mark.parametrize(
    "m, n",
    [((0, 2), (2, 2)), ((1, 1), (2, 1)), ((3, 0, 1), (4, 1, 1))],
)
def test_counts_to_cumulative_examples(m, n):
    assert cumulative_from_counts(DcsCounts(m)).n == n
    assert counts_from_cumulative(DcsCumulative(n)).m == m


def test_cumulative_by_hand_recurrence():
    # n_{T-1} = m_T and n_t = n_{t+1} + m_{t+1}
    m = (2, 0, 5, 1)
    n = [0] * 4
    n[3] = m[3]
    for t in (2, 1, 0):
        n[t] = n[t + 1] + m[t]
    assert cumulative_from_counts(DcsCounts(m)).n == tuple(n)


def test_non_monotone_rejected():
    with pytest.raises(MonotonicityViolation):
        counts_from_cumulative((1, 2))
    with pytest.raises(MonotonicityViolation):
        DcsCumulative((1, 2))


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        DcsCounts((1, -1))


@pytest.mark.parametrize(
    "n, budget, ok",
    [((2, 2), 4, True), ((3, 1), 4, True), ((4, 0), 4, False), ((2, 2), 5, False), ((1, 2), 3, False)],
)
def test_validate_budget(n, budget, ok):
    assert validate_budget(n, budget) is ok


counts = st.lists(st.integers(0, 50), min_size=1, max_size=12)


@given(counts)
def test_round_trip_and_budget(m):
    dcs = DcsCounts(tuple(m))
    n = cumulative_from_counts(dcs)
    assert counts_from_cumulative(n) == dcs
    assert n.budget == sum(h * k for h, k in enumerate(m, start=1)) == dcs.budget
    assert all(a >= b for a, b in zip(n.n, n.n[1:]))


def test_lengths_longest_first():
    assert DcsCounts((3, 0, 1)).lengths().tolist() == [3, 1, 1, 1]


def test_cumulative_addition():
    assert (DcsCumulative((3, 1)) + DcsCumulative((2, 2))).n == (5, 3)


@pytest.mark.parametrize("T, gamma", [(0, 0.5), (3, 0.0), (3, 1.5)])
def test_eval_task_validation(T, gamma):
    with pytest.raises(ValueError):
        EvalTask(env=None, policy=None, horizon=T, gamma=gamma)


def test_eval_task_accepts_gamma_one():
    assert EvalTask(env=None, policy=None, horizon=1, gamma=1.0).gamma == 1.0
