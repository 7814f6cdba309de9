import math

import pytest
from hypothesis import given, settings, strategies as st

from plutus.errors import AllTrialsFailed, ZeroVolatility
from plutus.optimizer import (
    FAILED,
    Dimension,
    ParamSpace,
    Trial,
    best_of,
    optimize,
    running_best,
    sample_params,
    uniform01,
)

UNIT = ParamSpace.of(x=(0.0, 1.0))
BOX = ParamSpace.of(x=(0.0, 5.0), y=(-1.0, 1.0))


def parabola(p):
    return -(p["x"] - 2.5) ** 2


def test_same_key_same_draw():
    assert sample_params(BOX, 2025, 7) == sample_params(BOX, 2025, 7)
    assert sample_params(BOX, 2025, 7) != sample_params(BOX, 2025, 8)
    assert sample_params(BOX, 2025, 7) != sample_params(BOX, 2026, 7)


def test_draws_do_not_depend_on_call_order():
    forward = [sample_params(BOX, 1, i) for i in range(20)]
    backward = [sample_params(BOX, 1, i) for i in reversed(range(20))][::-1]
    assert forward == backward


def test_dimensions_use_independent_streams():
    xs = [sample_params(ParamSpace.of(a=(0, 1), b=(0, 1)), 3, i) for i in range(200)]
    assert sum(p["a"] == p["b"] for p in xs) == 0


def test_degenerate_space():
    eps = 1e-9
    space = ParamSpace.of(x=(1.0, 1.0 + eps))
    for i in range(50):
        assert abs(sample_params(space, 0, i)["x"] - 1.0) <= eps


def test_uniform_mean():
    # standard error of the mean is 1/sqrt(12 * 10000) ~= 0.0029, so 0.02 is ~7 sigma
    draws = [uniform01(2025, i, 0) for i in range(10_000)]
    assert abs(sum(draws) / len(draws) - 0.5) <= 0.02
    assert all(0.0 <= u < 1.0 for u in draws)


def test_dimension_validation():
    with pytest.raises(ValueError):
        Dimension("x", 1.0, 1.0)
    with pytest.raises(ValueError):
        Dimension("x", 0.0, math.inf)


def test_parabola_optimum():
    # a miss needs all 200 draws outside a 10% band: 0.9**200 ~ 7e-10
    res = optimize(UNIT.of(x=(0.0, 5.0)), parabola, seed=2025, n_trials=200)
    assert abs(res.best_trial.params["x"] - 2.5) <= 0.25
    assert res.n_trials == 200 and res.seed == 2025 and len(res.all_trials) == 200


def test_single_trial():
    res = optimize(UNIT, lambda p: p["x"], seed=1, n_trials=1)
    assert res.best_trial == res.all_trials[0]
    assert res.best_trial.index == 0


def test_all_failing():
    def boom(p):
        raise ZeroVolatility("flat")

    with pytest.raises(AllTrialsFailed):
        optimize(UNIT, boom, seed=1, n_trials=5)
    with pytest.raises(AllTrialsFailed):
        optimize(UNIT, lambda p: math.nan, seed=1, n_trials=5)
    with pytest.raises(ValueError):
        optimize(UNIT, parabola, n_trials=0)


def test_failures_are_recorded_not_raised():
    def sometimes(p):
        if p["x"] < 0.5:
            raise ZeroVolatility("flat")
        return p["x"]

    res = optimize(UNIT, sometimes, seed=4, n_trials=40)
    failed = [t for t in res.all_trials if t.status == FAILED]
    assert failed and all(t.objective is None and "ZeroVolatility" in t.error for t in failed)
    assert res.best_trial.objective == max(t.objective for t in res.all_trials if t.ok)


def test_ties_go_to_lowest_index():
    trials = [Trial(3, {}, 1.0), Trial(1, {}, 1.0), Trial(2, {}, 0.5), Trial(0, {}, None, FAILED)]
    assert best_of(trials).index == 1
    res = optimize(UNIT, lambda p: 7.0, seed=9, n_trials=10)
    assert res.best_trial.index == 0


def test_reproducible_and_scheduling_independent():
    a = optimize(BOX, parabola, seed=11, n_trials=60)
    b = optimize(BOX, parabola, seed=11, n_trials=60)
    c = optimize(BOX, parabola, seed=11, n_trials=60, workers=8)
    assert a == b == c


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=60))
def test_running_best_is_monotone(seed, n):
    res = optimize(BOX, parabola, seed=seed, n_trials=n)
    rb = running_best(res.all_trials)
    assert all(b >= a for a, b in zip(rb, rb[1:]))
    assert rb[-1] == res.best_trial.objective


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**63), st.integers(min_value=0, max_value=10_000))
def test_params_within_bounds(seed, index):
    p = sample_params(BOX, seed, index)
    assert 0.0 <= p["x"] <= 5.0 and -1.0 <= p["y"] <= 1.0
