"""Inventory-skewed two-sided quoting over a tick replay.

Quotes are placed around the latest tick price::

    bid = mid - step * (max(inventory, 0) * coeff + 1)
    ask = mid - step * (min(inventory, 0) * coeff - 1)

so a long book pushes the bid away and a short book pushes the ask away.

Fill model: a resting quote fills one contract when a tick trades at or
through it (``price <= bid`` buys, ``price >= ask`` sells).  Fees are charged
in points against the trader on both sides.  Quotes are re-posted on a fixed
cadence and immediately after any fill.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta
from typing import Optional

from .errors import EmptySeries, NoActiveQuote
from .market_data import Tick, TickSeries
from .metrics import NavSeries

INVENTORY_COEFF = 0.02


@dataclass(frozen=True)
class MarketMakerConfig:
    step: float = 1.8
    inventory_coeff: float = INVENTORY_COEFF
    fee_points: float = 0.2
    refresh_interval: float = 15.0
    initial_capital: float = 500_000_000.0
    point_value: float = 100_000.0
    start: Optional[datetime] = None
    end: Optional[datetime] = None

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.inventory_coeff < 0:
            raise ValueError("inventory_coeff must be >= 0")
        if self.fee_points < 0:
            raise ValueError("fee_points must be >= 0")
        if not self.refresh_interval > 0:
            raise ValueError("refresh_interval must be positive")
        if not self.point_value > 0:
            raise ValueError("point_value must be positive")


@dataclass(frozen=True)
class Quote:
    bid: float
    ask: float


@dataclass(frozen=True)
class Fill:
    timestamp: datetime
    side: str  # "buy" or "sell"
    price: float
    fee_points: float
    inventory_after: int


@dataclass(frozen=True)
class MMState:
    inventory: int = 0
    cash: float = 0.0
    last_refresh: Optional[datetime] = None
    active_quote: Optional[Quote] = None
    # Neumaier compensation term; the cash balance is ``cash + cash_carry``
    cash_carry: float = 0.0

    @property
    def balance(self) -> float:
        return self.cash + self.cash_carry

    def credited(self, amount: float) -> tuple[float, float]:
        """``(cash, carry)`` after adding ``amount`` with compensated summation."""
        total = self.cash + amount
        if abs(self.cash) >= abs(amount):
            carry = self.cash_carry + ((self.cash - total) + amount)
        else:
            carry = self.cash_carry + ((amount - total) + self.cash)
        return total, carry


@dataclass(frozen=True)
class InventorySeries:
    dates: tuple[date, ...]
    inventory: tuple[int, ...]


@dataclass(frozen=True)
class MarketMakerResult:
    nav: NavSeries
    inventory: InventorySeries
    fills: tuple[Fill, ...]
    final_state: MMState
    last_price: float


def compute_quotes(mid: float, inventory: int, step: float, inventory_coeff: float = INVENTORY_COEFF) -> Quote:
    bid = mid - step * (max(inventory, 0) * inventory_coeff + 1)
    ask = mid - step * (min(inventory, 0) * inventory_coeff - 1)
    return Quote(bid, ask)


def match_tick(state: MMState, tick: Tick, fee_points: float, point_value: float = 1.0) -> tuple[MMState, list[Fill]]:
    """Fill the resting quote against one tick.

    Touching or crossing the bid buys one contract at the bid; touching or
    crossing the ask sells one at the ask.  Cash moves by
    ``(price +/- fee_points) * point_value``.  A fill clears the active quote
    so the caller must re-quote.  Since ``bid < ask``, a tick can hit at most
    one side.
    """
    q = state.active_quote
    if q is None:
        raise NoActiveQuote("match_tick called without a resting quote")
    if tick.price <= q.bid:
        inv = state.inventory + 1
        cash, carry = state.credited(-(q.bid + fee_points) * point_value)
        fill = Fill(tick.timestamp, "buy", q.bid, fee_points, inv)
    elif tick.price >= q.ask:
        inv = state.inventory - 1
        cash, carry = state.credited((q.ask - fee_points) * point_value)
        fill = Fill(tick.timestamp, "sell", q.ask, fee_points, inv)
    else:
        return state, []
    return replace(state, inventory=inv, cash=cash, cash_carry=carry, active_quote=None), [fill]


def _requote(state: MMState, tick: Tick, cfg: MarketMakerConfig) -> MMState:
    quote = compute_quotes(tick.price, state.inventory, cfg.step, cfg.inventory_coeff)
    return replace(state, active_quote=quote, last_refresh=tick.timestamp)


def _in_window(ticks: TickSeries, cfg: MarketMakerConfig) -> list[Tick]:
    return [
        t for t in ticks.ticks
        if (cfg.start is None or t.timestamp >= cfg.start) and (cfg.end is None or t.timestamp <= cfg.end)
    ]


def run_market_maker(cfg: MarketMakerConfig, ticks: TickSeries) -> MarketMakerResult:
    """Replay ``ticks`` through the quoting loop.

    NAV is marked at the last tick of each trading day as
    ``cash + inventory * price * point_value``.  The series opens with the
    initial capital dated the calendar day before the first trading day.
    Inventory carries over between days.
    """
    replay = _in_window(ticks, cfg)
    if not replay:
        raise EmptySeries("no ticks inside the backtest window")

    interval = timedelta(seconds=cfg.refresh_interval)
    state = MMState(cash=cfg.initial_capital)
    fills: list[Fill] = []
    day_marks: dict[date, tuple[float, int]] = {}

    for tick in replay:
        if state.active_quote is not None:
            state, new = match_tick(state, tick, cfg.fee_points, cfg.point_value)
            fills.extend(new)
        if state.active_quote is None or tick.timestamp - state.last_refresh >= interval:
            state = _requote(state, tick, cfg)
        day = tick.timestamp.date()
        day_marks[day] = (state.balance + state.inventory * tick.price * cfg.point_value, state.inventory)

    days = list(day_marks)
    nav = NavSeries(
        (days[0] - timedelta(days=1),) + tuple(days),
        (cfg.initial_capital,) + tuple(v for v, _ in day_marks.values()),
    )
    inventory = InventorySeries(tuple(days), tuple(q for _, q in day_marks.values()))
    return MarketMakerResult(nav, inventory, tuple(fills), state, replay[-1].price)


def daily_inventory(fills, days) -> InventorySeries:
    """End-of-day inventory for each day in ``days``, rebuilt from a fill log."""
    inv = 0
    out = []
    i = 0
    fills = list(fills)
    for d in days:
        while i < len(fills) and fills[i].timestamp.date() <= d:
            inv = fills[i].inventory_after
            i += 1
        out.append(inv)
    return InventorySeries(tuple(days), tuple(out))
