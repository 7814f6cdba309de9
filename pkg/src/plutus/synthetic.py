"""Seeded synthetic market data for fixtures, demos and sanity checks.

Nothing here claims to resemble a real market beyond the shape of the data:
tick streams are sampled on a fixed intraday grid, fundamentals are monthly
panels with occasional gaps.
"""

from __future__ import annotations

import math
from datetime import date, datetime, time, timedelta, timezone
from typing import Optional, Sequence

import numpy as np

from .market_data import BenchmarkSeries, FundamentalRow, FundamentalTable, Tick, TickSeries, month_end

SESSION_OPEN = time(2, 0, tzinfo=timezone.utc)


def tick_times(n: int, start: date, interval: float = 3.0, ticks_per_day: int = 2000) -> list[datetime]:
    """``n`` timestamps, ``ticks_per_day`` per weekday session, ``interval`` seconds apart."""
    out = []
    day = start
    while len(out) < n:
        if day.weekday() < 5:
            open_ = datetime.combine(day, SESSION_OPEN)
            k = min(ticks_per_day, n - len(out))
            out.extend(open_ + timedelta(seconds=interval * i) for i in range(k))
        day += timedelta(days=1)
    return out


def _to_series(prices: Sequence[float], times: Sequence[datetime], instrument: str, tick_size: float) -> TickSeries:
    ticks = []
    for ts, p in zip(times, prices):
        p = round(round(p / tick_size) * tick_size, 10) if tick_size else float(p)
        ticks.append(Tick(ts, max(p, tick_size or 1e-9)))
    return TickSeries(instrument, tuple(ticks))


def constant_ticks(n: int, price: float = 1000.0, start: date = date(2022, 1, 3), **kw) -> TickSeries:
    times = tick_times(n, start, **kw)
    return TickSeries("SYNTH", tuple(Tick(t, price) for t in times))


def random_walk_ticks(
    n: int,
    seed: int,
    p0: float = 1000.0,
    sigma: float = 0.5,
    drift: float = 0.0,
    tick_size: float = 0.1,
    start: date = date(2022, 1, 3),
    **kw,
) -> TickSeries:
    rng = np.random.default_rng(seed)
    steps = drift + sigma * rng.standard_normal(n)
    steps[0] = 0.0
    prices = p0 + np.cumsum(steps)
    return _to_series(prices.tolist(), tick_times(n, start, **kw), "SYNTH", tick_size)


def ou_ticks(
    n: int,
    seed: int,
    mean: float = 1000.0,
    reversion: float = 0.05,
    sigma: float = 0.6,
    tick_size: float = 0.1,
    start: date = date(2022, 1, 3),
    **kw,
) -> TickSeries:
    """Discrete Ornstein-Uhlenbeck: ``x += reversion * (mean - x) + sigma * z``."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    x = mean
    prices = []
    for i in range(n):
        if i:
            x += reversion * (mean - x) + sigma * z[i]
        prices.append(x)
    return _to_series(prices, tick_times(n, start, **kw), "SYNTH", tick_size)


def regime_ticks(
    n: int,
    seed: int,
    split: float = 0.5,
    mean: float = 1000.0,
    reversion: float = 0.05,
    sigma: float = 0.6,
    trend: float = -0.02,
    tick_size: float = 0.1,
    start: date = date(2022, 1, 3),
    **kw,
) -> TickSeries:
    """Mean-reverting first part, trending random walk after ``split``."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    cut = int(n * split)
    x = mean
    prices = []
    for i in range(n):
        if i:
            if i < cut:
                x += reversion * (mean - x) + sigma * z[i]
            else:
                x += trend + sigma * z[i]
        prices.append(x)
    return _to_series(prices, tick_times(n, start, **kw), "SYNTH", tick_size)


def _month_ends(start: date, n_months: int) -> list[date]:
    out = []
    y, m = start.year, start.month
    for _ in range(n_months):
        out.append(month_end(date(y, m, 1)))
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return out


def fundamentals(
    n_tickers: int = 20,
    n_months: int = 24,
    seed: int = 7,
    start: date = date(2022, 1, 31),
    monthly_drift: Optional[Sequence[float]] = None,
    vol: float = 0.06,
    missing_rate: float = 0.02,
) -> FundamentalTable:
    """Monthly panel of P/E, dividend yield and price.

    ``monthly_drift`` optionally gives a market-wide drift per month, which
    lets callers build bull-then-bear regimes.
    """
    rng = np.random.default_rng(seed)
    months = _month_ends(start, n_months)
    drift = list(monthly_drift) if monthly_drift is not None else [0.005] * n_months
    rows = []
    for k in range(n_tickers):
        ticker = f"T{k:03d}"
        price = float(rng.uniform(10, 100))
        pe = float(rng.uniform(-5, 30))
        dy = float(rng.uniform(0, 0.08))
        for i, m in enumerate(months):
            if i:
                price *= math.exp(drift[i] + vol * float(rng.standard_normal()))
                pe = pe * math.exp(0.1 * float(rng.standard_normal()))
                dy = max(0.0, dy + 0.005 * float(rng.standard_normal()))
            pe_out = None if rng.random() < missing_rate else round(pe, 6)
            dy_out = None if rng.random() < missing_rate else round(dy, 6)
            rows.append(FundamentalRow(ticker, m, pe_out, dy_out, round(price, 6)))
    return FundamentalTable.from_rows(rows)


def benchmark(
    start: date, n_days: int, seed: int = 11, level: float = 1000.0, daily_drift: Optional[Sequence[float]] = None,
    vol: float = 0.01,
) -> BenchmarkSeries:
    rng = np.random.default_rng(seed)
    dates, levels = [], []
    d = start
    i = 0
    while len(dates) < n_days:
        if d.weekday() < 5:
            if dates:
                mu = daily_drift[i] if daily_drift is not None else 0.0003
                level *= math.exp(mu + vol * float(rng.standard_normal()))
            dates.append(d)
            levels.append(round(level, 6))
            i += 1
        d += timedelta(days=1)
    return BenchmarkSeries(tuple(dates), tuple(levels))
