from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import pytest

from plutus.market_data import FundamentalRow, FundamentalTable, Tick, TickSeries


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def ts(seconds: float, day: date = date(2022, 1, 3)) -> datetime:
    base = datetime(day.year, day.month, day.day, 2, 0, tzinfo=timezone.utc)
    return base + timedelta(seconds=seconds)


def make_ticks(prices, interval=1.0, day=date(2022, 1, 3)) -> TickSeries:
    return TickSeries("TEST", tuple(Tick(ts(i * interval, day), float(p)) for i, p in enumerate(prices)))


def table(*rows) -> FundamentalTable:
    """rows: (ticker, month_end, pe, dy, price)"""
    return FundamentalTable.from_rows(FundamentalRow(*r) for r in rows)


@pytest.fixture
def tmp(tmp_path):
    return tmp_path


@pytest.fixture
def datadir(tmp_path):
    """Small synthetic dataset plus a config pointing at it."""
    from plutus import market_data, synthetic

    d = tmp_path / "data"
    d.mkdir()
    market_data.write_tick_series(synthetic.ou_ticks(3000, seed=5, ticks_per_day=400), d / "ticks.csv")
    fund = synthetic.fundamentals(n_tickers=25, n_months=12, seed=8)
    market_data.write_fundamentals(fund, d / "fundamentals.csv")
    market_data.write_benchmark(synthetic.benchmark(date(2022, 1, 3), 300, seed=2), d / "benchmark.csv")
    market_data.write_tick_series(synthetic.constant_ticks(1200, ticks_per_day=400), d / "flat.csv")
    write(d / "run.cfg", (
        "data.ticks = ticks.csv\n"
        "data.fundamentals = fundamentals.csv\n"
        "data.benchmark = benchmark.csv\n"
        "optimizer.n_trials = 12\n"
        "optimizer.min_qualified = 1\n"
    ))
    return d
