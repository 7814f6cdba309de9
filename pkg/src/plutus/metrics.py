"""Performance metrics: Sharpe, Sortino, Information Ratio, Maximum Drawdown.

Conventions, fixed so reruns agree to the last bit:

* sample (n - 1) standard deviation everywhere;
* the annual risk-free rate is de-annualized geometrically,
  ``(1 + rf) ** (1 / periods_per_year) - 1``;
* Sortino's downside deviation divides by the full period count;
* Information Ratio is per-period unless ``annualize=True``.

Unit functions raise on undefined values; :func:`compute_report` records
them as ``None`` instead so a batch report never aborts.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from datetime import date
from typing import Optional, Sequence

from .errors import (
    LengthMismatch,
    MetricError,
    SeriesTooShort,
    ZeroDownside,
    ZeroTrackingError,
    ZeroVolatility,
)
from .market_data import BenchmarkSeries

DAILY = 252
MONTHLY = 12


@dataclass(frozen=True)
class NavSeries:
    dates: tuple[date, ...]
    nav: tuple[float, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.nav):
            raise LengthMismatch(f"{len(self.dates)} dates but {len(self.nav)} NAV values")

    def __len__(self) -> int:
        return len(self.nav)

    def scaled(self, factor: float) -> "NavSeries":
        return NavSeries(self.dates, tuple(v * factor for v in self.nav))


@dataclass(frozen=True)
class ReturnSeries:
    dates: tuple[date, ...]
    returns: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.returns)


@dataclass(frozen=True)
class MetricsReport:
    sharpe: Optional[float]
    sortino: Optional[float]
    information_ratio: Optional[float]
    max_drawdown: float
    period_start: date
    period_end: date
    # reason text per metric that could not be computed
    undefined: tuple[tuple[str, str], ...] = ()

    def as_items(self) -> list[tuple[str, str]]:
        """Flat ``(key, value)`` pairs; undefined metrics render as ``undefined``."""

        def fmt(v):
            return "undefined" if v is None else repr(float(v))

        items = [
            ("period_start", self.period_start.isoformat()),
            ("period_end", self.period_end.isoformat()),
            ("sharpe", fmt(self.sharpe)),
            ("sortino", fmt(self.sortino)),
        ]
        if self.information_ratio is not None or any(k == "information_ratio" for k, _ in self.undefined):
            items.append(("information_ratio", fmt(self.information_ratio)))
        items.append(("max_drawdown", fmt(self.max_drawdown)))
        return items


def _as_values(x) -> tuple[float, ...]:
    if isinstance(x, ReturnSeries):
        return x.returns
    if isinstance(x, NavSeries):
        return x.nav
    return tuple(x)


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def _sample_std(xs: Sequence[float]) -> float:
    if all(x == xs[0] for x in xs):
        # exact zero; the mean of identical values can be off by an ulp
        return 0.0
    m = _mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def periodic_rate(rf_annual: float, periods_per_year: int) -> float:
    return (1.0 + rf_annual) ** (1.0 / periods_per_year) - 1.0


def to_returns(nav) -> ReturnSeries:
    values = _as_values(nav)
    if len(values) < 2:
        raise SeriesTooShort(f"need at least 2 NAV points, got {len(values)}")
    if any(v <= 0 for v in values):
        raise ValueError("NAV values must be strictly positive")
    dates = nav.dates[1:] if isinstance(nav, NavSeries) else ()
    return ReturnSeries(dates, tuple(values[i + 1] / values[i] - 1.0 for i in range(len(values) - 1)))


def _excess(r, rf_annual: float, periods_per_year: int) -> tuple[float, ...]:
    values = _as_values(r)
    if len(values) < 2:
        raise SeriesTooShort(f"need at least 2 returns, got {len(values)}")
    rf = periodic_rate(rf_annual, periods_per_year)
    return tuple(x - rf for x in values)


def sharpe_ratio(r, rf_annual: float = 0.0, periods_per_year: int = DAILY) -> float:
    """Annualized Sharpe ratio of a return series.

    Args:
        r: ReturnSeries or a plain sequence of simple periodic returns.
        rf_annual: Annual risk-free rate as a fraction.
        periods_per_year: Annualization factor (252 daily, 12 monthly).

    Raises:
        SeriesTooShort: fewer than two returns.
        ZeroVolatility: sample standard deviation of excess returns is zero.
    """
    excess = _excess(r, rf_annual, periods_per_year)
    sd = _sample_std(excess)
    if sd == 0.0:
        raise ZeroVolatility("excess returns have zero standard deviation")
    return _mean(excess) / sd * math.sqrt(periods_per_year)


def downside_deviation(excess: Sequence[float]) -> float:
    return math.sqrt(math.fsum(min(x, 0.0) ** 2 for x in excess) / len(excess))


def sortino_ratio(r, rf_annual: float = 0.0, periods_per_year: int = DAILY) -> float:
    """Annualized Sortino ratio; downside deviation is taken over all periods."""
    excess = _excess(r, rf_annual, periods_per_year)
    dd = downside_deviation(excess)
    if dd == 0.0:
        raise ZeroDownside("no return falls below the risk-free rate")
    return _mean(excess) / dd * math.sqrt(periods_per_year)


def information_ratio(r, b, annualize: bool = False, periods_per_year: int = DAILY) -> float:
    """Mean active return over tracking error (sample stdev of active returns)."""
    rv, bv = _as_values(r), _as_values(b)
    if len(rv) != len(bv):
        raise LengthMismatch(f"strategy has {len(rv)} returns, benchmark {len(bv)}")
    if isinstance(r, ReturnSeries) and isinstance(b, ReturnSeries) and r.dates and b.dates and r.dates != b.dates:
        raise LengthMismatch("strategy and benchmark returns are not date-aligned")
    if len(rv) < 2:
        raise SeriesTooShort(f"need at least 2 returns, got {len(rv)}")
    active = [x - y for x, y in zip(rv, bv)]
    te = _sample_std(active)
    if te == 0.0:
        raise ZeroTrackingError("active returns have zero standard deviation")
    ir = _mean(active) / te
    return ir * math.sqrt(periods_per_year) if annualize else ir


def max_drawdown(nav) -> float:
    values = _as_values(nav)
    if not values:
        raise SeriesTooShort("empty NAV series")
    peak = values[0]
    worst = 0.0
    for v in values:
        if v > peak:
            peak = v
        dd = v / peak - 1.0
        if dd < worst:
            worst = dd
    return worst


def align_benchmark(nav: NavSeries, benchmark: BenchmarkSeries) -> NavSeries:
    """Benchmark levels sampled as-of each NAV date (last level on or before it)."""
    levels = []
    for d in nav.dates:
        i = bisect.bisect_right(benchmark.dates, d) - 1
        if i < 0:
            raise LengthMismatch(f"benchmark has no level on or before {d}")
        levels.append(benchmark.levels[i])
    return NavSeries(nav.dates, tuple(levels))


def compute_report(
    nav: NavSeries,
    benchmark: Optional[BenchmarkSeries] = None,
    rf_annual: float = 0.06,
    periods_per_year: int = DAILY,
    annualize_ir: bool = False,
) -> MetricsReport:
    undefined = []
    mdd = max_drawdown(nav)
    returns = to_returns(nav)

    def attempt(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MetricError as exc:
            undefined.append((name, f"{exc.kind}: {exc}"))
            return None

    sharpe = attempt("sharpe", sharpe_ratio, returns, rf_annual, periods_per_year)
    if sharpe is None and any(k == "sharpe" and "ZeroVolatility" in why for k, why in undefined):
        # a constant excess series carries no risk to measure downside against
        undefined.append(("sortino", "ZeroVolatility: excess returns are constant"))
        sortino = None
    else:
        sortino = attempt("sortino", sortino_ratio, returns, rf_annual, periods_per_year)
    ir = None
    if benchmark is not None:
        bench_returns = to_returns(align_benchmark(nav, benchmark))
        ir = attempt(
            "information_ratio", information_ratio, returns, bench_returns,
            annualize=annualize_ir, periods_per_year=periods_per_year,
        )
    return MetricsReport(
        sharpe=sharpe,
        sortino=sortino,
        information_ratio=ir,
        max_drawdown=mdd,
        period_start=nav.dates[0],
        period_end=nav.dates[-1],
        undefined=tuple(undefined),
    )
