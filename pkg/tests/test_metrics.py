import math
from datetime import date, timedelta

import pytest
from hypothesis import assume, given, settings, strategies as st

import oracles
from plutus.errors import (
    LengthMismatch,
    SeriesTooShort,
    ZeroDownside,
    ZeroTrackingError,
    ZeroVolatility,
)
from plutus.market_data import BenchmarkSeries
from plutus.metrics import (
    NavSeries,
    compute_report,
    downside_deviation,
    information_ratio,
    max_drawdown,
    periodic_rate,
    sharpe_ratio,
    sortino_ratio,
    to_returns,
)

# frozen from tests/oracles.py (exact rationals, 50-digit sqrt)
SHARPE_EXAMPLE = 1.161895003862225
SORTINO_EXAMPLE = 0.8660254037844386


def nav_of(values, start=date(2022, 1, 1)):
    return NavSeries(tuple(start + timedelta(days=i) for i in range(len(values))), tuple(float(v) for v in values))


def test_to_returns():
    assert to_returns(nav_of([100, 110])).returns == pytest.approx((0.10,), rel=1e-15)
    assert to_returns(nav_of([100, 100, 100])).returns == (0.0, 0.0)
    with pytest.raises(SeriesTooShort):
        to_returns(nav_of([100]))


def test_returns_carry_dates():
    n = nav_of([1, 2, 3])
    assert to_returns(n).dates == n.dates[1:]


def test_frozen_values_match_oracle():
    assert oracles.sharpe([0.02, 0.0, 0.01, 0.03]) == pytest.approx(SHARPE_EXAMPLE, rel=1e-15)
    assert oracles.sortino([0.04, -0.02, 0.01]) == pytest.approx(SORTINO_EXAMPLE, rel=1e-15)


def test_sharpe_examples():
    assert sharpe_ratio([0.01, -0.01], 0.0, 1) == 0.0
    assert sharpe_ratio([0.02, 0.00, 0.01, 0.03], 0.0, 1) == pytest.approx(SHARPE_EXAMPLE, rel=1e-9)
    with pytest.raises(ZeroVolatility):
        sharpe_ratio([0.01, 0.01], 0.0, 1)
    with pytest.raises(SeriesTooShort):
        sharpe_ratio([0.01], 0.0, 1)


def test_sharpe_risk_free_is_geometric():
    r = [0.01, 0.02, -0.005, 0.004]
    rf = (1.06) ** (1 / 12) - 1
    assert periodic_rate(0.06, 12) == rf
    assert sharpe_ratio(r, 0.06, 12) == pytest.approx(oracles.sharpe(r, rf, 12), rel=1e-12)


def test_sortino_examples():
    with pytest.raises(ZeroDownside):
        sortino_ratio([0.01, 0.02], 0.0, 1)
    assert sortino_ratio([0.01, -0.01], 0.0, 1) == 0.0
    assert sortino_ratio([0.02, -0.02], 0.0, 1) == 0.0
    assert sortino_ratio([0.04, -0.02, 0.01], 0.0, 1) == pytest.approx(SORTINO_EXAMPLE, rel=1e-9)


def test_information_ratio_examples():
    r = [0.01, 0.02, 0.03]
    with pytest.raises(ZeroTrackingError):
        information_ratio(r, r)
    assert information_ratio([0.01, -0.01], [0.0, 0.0]) == 0.0
    b = [0.001, -0.002, 0.004, 0.0]
    r = [a + x for a, x in zip([0.02, 0.00, 0.01, 0.03], b)]
    assert information_ratio(r, b) == pytest.approx(SHARPE_EXAMPLE, rel=1e-9)
    assert information_ratio(r, b, annualize=True, periods_per_year=12) == pytest.approx(
        SHARPE_EXAMPLE * math.sqrt(12), rel=1e-9)
    with pytest.raises(LengthMismatch):
        information_ratio([0.1, 0.2], [0.1])


def test_max_drawdown_examples():
    assert max_drawdown(nav_of([100, 110, 120])) == 0.0
    assert max_drawdown(nav_of([100, 120, 90, 110])) == -0.25
    assert max_drawdown(nav_of([100])) == 0.0
    with pytest.raises(SeriesTooShort):
        max_drawdown([])


def test_report_market_maker_style_has_no_ir():
    rep = compute_report(nav_of([100, 101, 99, 102, 103, 100]), None, 0.06, 252)
    assert rep.sharpe is not None and rep.sortino is not None
    assert rep.information_ratio is None
    keys = [k for k, _ in rep.as_items()]
    assert "information_ratio" not in keys
    assert rep.max_drawdown == pytest.approx(100 / 103 - 1)


def test_report_flat_nav_flags_undefined():
    rep = compute_report(nav_of([100, 100, 100, 100]), None, 0.06, 252)
    assert rep.max_drawdown == 0.0
    assert rep.sharpe is None and rep.sortino is None
    assert {k for k, _ in rep.undefined} == {"sharpe", "sortino"}
    assert dict(rep.as_items())["sharpe"] == "undefined"
    rep0 = compute_report(nav_of([100, 100, 100]), None, 0.0, 252)
    assert rep0.sharpe is None and rep0.sortino is None


def test_report_with_benchmark_has_all_four():
    nav = nav_of([100, 103, 101, 106, 104, 108])
    bench = BenchmarkSeries(nav.dates, (1000.0, 1010.0, 1005.0, 1020.0, 1030.0, 1025.0))
    rep = compute_report(nav, bench, 0.06, 252)
    assert None not in (rep.sharpe, rep.sortino, rep.information_ratio)
    r = to_returns(nav).returns
    b = [bench.levels[i + 1] / bench.levels[i] - 1 for i in range(5)]
    assert rep.information_ratio == pytest.approx(oracles.information_ratio([x - y for x, y in zip(r, b)]), rel=1e-12)


def test_benchmark_is_sampled_as_of_nav_dates():
    nav = NavSeries((date(2022, 1, 31), date(2022, 2, 28), date(2022, 3, 31)), (100.0, 110.0, 105.0))
    bench = BenchmarkSeries(
        (date(2022, 1, 30), date(2022, 2, 25), date(2022, 3, 31), date(2022, 4, 1)),
        (1000.0, 1100.0, 1000.0, 5.0),
    )
    rep = compute_report(nav, bench, 0.0, 12)
    # active returns are 0.1 - 0.1 = 0 and -0.04545 - (-0.0909)
    assert rep.information_ratio is None or math.isfinite(rep.information_ratio)
    with pytest.raises(LengthMismatch):
        compute_report(nav, BenchmarkSeries((date(2022, 2, 1),), (1.0,)), 0.0, 12)


# -- properties --------------------------------------------------------------

navs = st.lists(st.floats(min_value=1.0, max_value=1e6, allow_nan=False), min_size=3, max_size=40)


@settings(max_examples=200, deadline=None)
@given(navs, st.floats(min_value=1e-3, max_value=1e3))
def test_scale_invariance(values, k):
    nav = nav_of(values)
    try:
        base = sharpe_ratio(to_returns(nav), 0.06, 252)
    except ZeroVolatility:
        return
    scaled = nav.scaled(k)
    assert sharpe_ratio(to_returns(scaled), 0.06, 252) == pytest.approx(base, rel=1e-6, abs=1e-6)
    assert max_drawdown(scaled) == pytest.approx(max_drawdown(nav), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=-0.5, max_value=0.5, allow_nan=False), min_size=2, max_size=30))
def test_sharpe_sign_follows_mean_excess(returns):
    try:
        s = sharpe_ratio(returns, 0.0, 252)
    except ZeroVolatility:
        return
    m = math.fsum(returns) / len(returns)
    assert (s > 0) == (m > 0)


@settings(max_examples=300, deadline=None)
@given(navs)
def test_drawdown_matches_brute_force(values):
    assert max_drawdown(values) == oracles.brute_max_drawdown(values)


@settings(max_examples=200, deadline=None)
@given(navs, st.integers(min_value=1, max_value=40))
def test_drawdown_of_prefix_is_not_worse(values, k):
    k = min(k, len(values))
    assert max_drawdown(values[:k]) >= max_drawdown(values)
    assert -1.0 <= max_drawdown(values) <= 0.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=-0.2, max_value=0.2, allow_nan=False), min_size=2, max_size=30),
       st.floats(min_value=0.5, max_value=5.0))
def test_downside_ignores_positive_returns(excess, big):
    base = math.fsum(min(x, 0.0) ** 2 for x in excess)
    extended = excess + [big]
    assert math.fsum(min(x, 0.0) ** 2 for x in extended) == base
    assert downside_deviation(extended) == pytest.approx(math.sqrt(base / len(extended)), rel=1e-12)
