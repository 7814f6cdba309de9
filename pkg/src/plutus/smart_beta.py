"""Value-screened, equally weighted monthly portfolio.

At every month-end in the backtest window the engine marks the portfolio,
sells everything, screens the universe on P/E and dividend yield and buys the
survivors in equal value.  Fees are a fraction of traded value on both legs.
Shares are fractional and cash earns nothing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date
from typing import Mapping, Optional, Sequence

from .errors import MissingPrice, UnknownMonth
from .market_data import FundamentalTable
from .metrics import NavSeries

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScreenBounds:
    pe_min: float = 0.0
    pe_max: float = 15.0
    dy_min: float = 0.01
    # None means no upper bound on dividend yield
    dy_max: Optional[float] = None

    def __post_init__(self):
        if not self.pe_min < self.pe_max:
            raise ValueError(f"pe_min ({self.pe_min}) must be below pe_max ({self.pe_max})")
        if self.dy_min < 0:
            raise ValueError(f"dy_min must be >= 0, got {self.dy_min}")
        if self.dy_max is not None and not self.dy_min < self.dy_max:
            raise ValueError(f"dy_min ({self.dy_min}) must be below dy_max ({self.dy_max})")

    def admits(self, pe: Optional[float], dy: Optional[float]) -> bool:
        if pe is None or dy is None:
            return False
        if not self.pe_min < pe < self.pe_max:
            return False
        if not dy > self.dy_min:
            return False
        return self.dy_max is None or dy < self.dy_max


@dataclass(frozen=True)
class SmartBetaConfig:
    bounds: ScreenBounds = field(default_factory=ScreenBounds)
    fee_rate: float = 0.00035
    rf_annual: float = 0.06
    initial_capital: float = 500_000_000.0
    start_date: Optional[date] = None
    end_date: Optional[date] = None
    # carry the last known price for a held ticker missing at rebalance
    allow_stale_prices: bool = False

    def __post_init__(self):
        if not 0 <= self.fee_rate < 1:
            raise ValueError(f"fee_rate must lie in [0, 1), got {self.fee_rate}")
        if not self.initial_capital > 0:
            raise ValueError("initial_capital must be positive")
        if self.start_date and self.end_date and not self.start_date < self.end_date:
            raise ValueError("start_date must precede end_date")


@dataclass(frozen=True)
class Portfolio:
    cash: float
    holdings: Mapping[str, float] = field(default_factory=dict)

    def value(self, prices: Mapping[str, float]) -> float:
        return self.cash + sum(qty * prices[t] for t, qty in sorted(self.holdings.items()))


@dataclass(frozen=True)
class Rebalance:
    date: date
    nav_before: float
    nav_after: float
    fees: float
    qualified: tuple[str, ...]
    # market value of each new position, in ``qualified`` order
    position_values: tuple[float, ...] = ()


@dataclass(frozen=True)
class SmartBetaResult:
    nav: NavSeries
    rebalances: tuple[Rebalance, ...]

    @property
    def min_qualified(self) -> int:
        return min((len(r.qualified) for r in self.rebalances), default=0)


def screen_universe(table: FundamentalTable, month: date, bounds: ScreenBounds) -> list[str]:
    """Tickers passing the P/E and dividend-yield screen at ``month``, sorted.

    All comparisons are strict, so a P/E of exactly ``pe_min`` (e.g. zero)
    or a yield of exactly ``dy_min`` is rejected. Rows with a missing P/E or
    yield never qualify.
    """
    if table.rows and month not in table.months:
        raise UnknownMonth(f"{month} is not a month in the fundamentals table")
    rows = table.rows_at(month)
    return sorted(t for t, row in rows.items() if bounds.admits(row.pe_ratio, row.dividend_yield))


def _price_of(ticker: str, prices: Mapping[str, float]) -> float:
    try:
        return prices[ticker]
    except KeyError:
        raise MissingPrice(f"no price for {ticker}") from None


def liquidate(p: Portfolio, prices: Mapping[str, float], fee_rate: float) -> Portfolio:
    if not p.holdings:
        return p
    proceeds = sum(qty * _price_of(t, prices) * (1.0 - fee_rate) for t, qty in sorted(p.holdings.items()))
    return Portfolio(cash=p.cash + proceeds, holdings={})


def allocate_equal(
    cash: float, tickers: Sequence[str], prices: Mapping[str, float], fee_rate: float
) -> Portfolio:
    """Spend ``cash`` equally across ``tickers``, fees included.

    Each name gets gross spend ``g = cash / (n * (1 + fee_rate))`` so that
    purchases plus fees exhaust the cash. An empty ticker list leaves the
    portfolio in cash.
    """
    if not tickers:
        return Portfolio(cash=cash, holdings={})
    n = len(tickers)
    g = cash / (n * (1.0 + fee_rate))
    holdings = {t: g / _price_of(t, prices) for t in tickers}
    residual = max(cash - n * g * (1.0 + fee_rate), 0.0)
    return Portfolio(cash=residual, holdings=holdings)


def _window(table: FundamentalTable, cfg: SmartBetaConfig) -> list[date]:
    return [
        m for m in table.months
        if (cfg.start_date is None or m >= cfg.start_date) and (cfg.end_date is None or m <= cfg.end_date)
    ]


def run_smart_beta(cfg: SmartBetaConfig, table: FundamentalTable) -> SmartBetaResult:
    months = _window(table, cfg)
    if not months:
        raise UnknownMonth("no fundamentals month-end falls inside the backtest window")

    dates: list[date] = []
    navs: list[float] = []
    if cfg.start_date is not None and cfg.start_date < months[0]:
        dates.append(cfg.start_date)
        navs.append(cfg.initial_capital)

    portfolio = Portfolio(cash=cfg.initial_capital)
    last_price: dict[str, float] = {}
    rebalances = []
    for month in months:
        rows = table.rows_at(month)
        prices = {t: r.price for t, r in rows.items()}
        for t in portfolio.holdings:
            if t not in prices:
                if not cfg.allow_stale_prices or t not in last_price:
                    raise MissingPrice(f"held ticker {t} has no price at {month}")
                log.warning("carrying stale price for %s at %s", t, month)
                prices[t] = last_price[t]
        last_price.update(prices)

        nav_before = portfolio.value(prices)
        dates.append(month)
        navs.append(nav_before)

        sell_fees = sum(qty * prices[t] * cfg.fee_rate for t, qty in sorted(portfolio.holdings.items()))
        cash = liquidate(portfolio, prices, cfg.fee_rate).cash
        qualified = screen_universe(table, month, cfg.bounds)
        portfolio = allocate_equal(cash, qualified, prices, cfg.fee_rate)
        buy_fees = (cash - portfolio.cash) * cfg.fee_rate / (1.0 + cfg.fee_rate)
        rebalances.append(Rebalance(
            date=month,
            nav_before=nav_before,
            nav_after=portfolio.value(prices),
            fees=sell_fees + buy_fees,
            qualified=tuple(qualified),
            position_values=tuple(portfolio.holdings[t] * prices[t] for t in qualified),
        ))
    return SmartBetaResult(NavSeries(tuple(dates), tuple(navs)), tuple(rebalances))
