"""CSV loaders for tick series, monthly fundamentals and benchmark levels.

File layouts (UTF-8, comma separated, empty field = missing value)::

    ticks.csv         timestamp,price
    fundamentals.csv  ticker,date,pe_ratio,dividend_yield,price
    benchmark.csv     date,level

Loaded series are frozen dataclasses holding tuples, so they can be shared
freely between concurrent backtests.
"""

from __future__ import annotations

import calendar
import csv
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, TypeVar

from .errors import DataFileNotFound, DuplicateRow, EmptySeries, SchemaError

TICK_COLUMNS = ("timestamp", "price")
FUNDAMENTAL_COLUMNS = ("ticker", "date", "pe_ratio", "dividend_yield", "price")
BENCHMARK_COLUMNS = ("date", "level")

K = TypeVar("K")


@dataclass(frozen=True)
class Tick:
    timestamp: datetime
    price: float


@dataclass(frozen=True)
class TickSeries:
    instrument: str
    ticks: tuple[Tick, ...]

    def __len__(self) -> int:
        return len(self.ticks)


@dataclass(frozen=True)
class FundamentalRow:
    ticker: str
    as_of: date
    pe_ratio: Optional[float]
    dividend_yield: Optional[float]
    price: float


@dataclass(frozen=True)
class FundamentalTable:
    rows: tuple[FundamentalRow, ...]
    months: tuple[date, ...]
    _by_month: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        index: dict[date, dict[str, FundamentalRow]] = {m: {} for m in self.months}
        for row in self.rows:
            index.setdefault(row.as_of, {})[row.ticker] = row
        object.__setattr__(self, "_by_month", index)

    @classmethod
    def from_rows(cls, rows: Iterable[FundamentalRow]) -> "FundamentalTable":
        rows = tuple(sorted(rows, key=lambda r: (r.as_of, r.ticker)))
        seen = set()
        for r in rows:
            if (r.ticker, r.as_of) in seen:
                raise DuplicateRow(f"two rows for {r.ticker} in {r.as_of:%Y-%m}")
            seen.add((r.ticker, r.as_of))
        return cls(rows=rows, months=tuple(sorted({r.as_of for r in rows})))

    def rows_at(self, month: date) -> dict[str, FundamentalRow]:
        """Rows for one month-end keyed by ticker (empty dict for unknown months)."""
        return self._by_month.get(month, {})


@dataclass(frozen=True)
class BenchmarkSeries:
    dates: tuple[date, ...]
    levels: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.dates)


def month_end(d: date) -> date:
    return date(d.year, d.month, calendar.monthrange(d.year, d.month)[1])


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 instant; naive values are taken to be UTC."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _parse_float(text: str, what: str, line: int) -> Optional[float]:
    text = text.strip()
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise SchemaError(f"line {line}: {what} {text!r} is not a number") from None
    if not math.isfinite(value):
        raise SchemaError(f"line {line}: {what} must be finite")
    return value


def read_rows(path, columns: tuple[str, ...]):
    """Yield ``(line_number, fields)`` for each non-blank data row."""
    path = Path(path)
    if not path.is_file():
        raise DataFileNotFound(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != columns:
            raise SchemaError(f"{path}: expected header {','.join(columns)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(columns):
                raise SchemaError(f"{path}: line {lineno}: expected {len(columns)} fields, got {len(row)}")
            yield lineno, row


def _clean_series(raw: list[tuple[K, Optional[float]]]) -> list[tuple[K, float]]:
    """Sort by key, keep the last row per key, forward-fill gaps, drop leading gaps."""
    # stable sort keeps file order among equal keys, so dict assignment is last-wins
    dedup: dict = {}
    for key, value in sorted(raw, key=lambda kv: kv[0]):
        dedup[key] = value
    out = []
    last = None
    for key, value in dedup.items():
        if value is None:
            value = last
        if value is None:
            continue
        out.append((key, value))
        last = value
    return out


def load_tick_series(path, instrument: str) -> TickSeries:
    raw = []
    for lineno, (ts_text, price_text) in read_rows(path, TICK_COLUMNS):
        try:
            ts = parse_timestamp(ts_text)
        except ValueError:
            raise SchemaError(f"line {lineno}: bad timestamp {ts_text!r}") from None
        price = _parse_float(price_text, "price", lineno)
        if price is not None and price <= 0:
            raise SchemaError(f"line {lineno}: price must be positive, got {price}")
        raw.append((ts, price))
    cleaned = _clean_series(raw)
    if not cleaned:
        raise EmptySeries(f"{path}: no valid prices after cleaning")
    return TickSeries(instrument, tuple(Tick(ts, p) for ts, p in cleaned))


def load_fundamentals(path) -> FundamentalTable:
    rows = []
    for lineno, (ticker, date_text, pe_text, dy_text, price_text) in read_rows(path, FUNDAMENTAL_COLUMNS):
        ticker = ticker.strip()
        if not ticker:
            raise SchemaError(f"line {lineno}: empty ticker")
        try:
            as_of = month_end(date.fromisoformat(date_text.strip()))
        except ValueError:
            raise SchemaError(f"line {lineno}: bad date {date_text!r}") from None
        price = _parse_float(price_text, "price", lineno)
        if price is None:
            continue
        if price <= 0:
            raise SchemaError(f"line {lineno}: price must be positive, got {price}")
        dy = _parse_float(dy_text, "dividend_yield", lineno)
        if dy is not None and dy < 0:
            raise SchemaError(f"line {lineno}: dividend_yield must be >= 0, got {dy}")
        rows.append(FundamentalRow(ticker, as_of, _parse_float(pe_text, "pe_ratio", lineno), dy, price))
    return FundamentalTable.from_rows(rows)


def load_benchmark(path) -> BenchmarkSeries:
    raw = []
    for lineno, (date_text, level_text) in read_rows(path, BENCHMARK_COLUMNS):
        try:
            d = date.fromisoformat(date_text.strip())
        except ValueError:
            raise SchemaError(f"line {lineno}: bad date {date_text!r}") from None
        level = _parse_float(level_text, "level", lineno)
        if level is not None and level <= 0:
            raise SchemaError(f"line {lineno}: level must be positive, got {level}")
        raw.append((d, level))
    cleaned = _clean_series(raw)
    if not cleaned:
        raise EmptySeries(f"{path}: no valid levels after cleaning")
    return BenchmarkSeries(tuple(d for d, _ in cleaned), tuple(v for _, v in cleaned))


def write_tick_series(series: TickSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("timestamp,price\n")
        for t in series.ticks:
            fh.write(f"{t.timestamp.isoformat()},{t.price!r}\n")


def write_fundamentals(table: FundamentalTable, path) -> None:
    def fmt(v):
        return "" if v is None else repr(v)

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(FUNDAMENTAL_COLUMNS) + "\n")
        for r in table.rows:
            fh.write(f"{r.ticker},{r.as_of.isoformat()},{fmt(r.pe_ratio)},{fmt(r.dividend_yield)},{r.price!r}\n")


def write_benchmark(series: BenchmarkSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write("date,level\n")
        for d, v in zip(series.dates, series.levels):
            fh.write(f"{d.isoformat()},{v!r}\n")
