"""Flat ``key = value`` run configuration.

One key per line, ``#`` starts a comment, keys are namespaced by module
(``smart_beta.fee_rate``).  Unknown keys are rejected; missing keys take the
defaults listed in :data:`SCHEMA`.  Relative data paths resolve against the
config file's directory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Any, Callable, Optional

from .errors import DataFileNotFound, InvalidValue, ParseError, UnknownKey
from .market_data import parse_timestamp


@dataclass(frozen=True)
class Key:
    name: str
    parse: Callable[[str], Any]
    default: Any
    check: Optional[Callable[[Any], Optional[str]]] = None
    doc: str = ""


def _float(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


def _int(text: str) -> int:
    return int(text)


def _bool(text: str) -> bool:
    value = text.lower()
    if value in {"true", "yes", "on", "1"}:
        return True
    if value in {"false", "no", "off", "0"}:
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _str(text: str) -> str:
    return text


def _optional(parse):
    def inner(text: str):
        return None if text == "" else parse(text)
    return inner


def _range(text: str) -> tuple[float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError("expected 'lower, upper'")
    return _float(parts[0]), _float(parts[1])


def _positive(v):
    return None if v > 0 else "must be > 0"


def _non_negative(v):
    return None if v >= 0 else "must be >= 0"


def _fraction(v):
    return None if 0 <= v < 1 else "must lie in [0, 1)"


def _ordered(v):
    return None if v[0] < v[1] else "lower must be below upper"


def _at_least_one(v):
    return None if v >= 1 else "must be >= 1"


SCHEMA: tuple[Key, ...] = (
    Key("data.ticks", _optional(_str), None, doc="tick CSV for the market maker"),
    Key("data.instrument", _str, "VN30F1M"),
    Key("data.fundamentals", _optional(_str), None, doc="fundamentals CSV for smart beta"),
    Key("data.benchmark", _optional(_str), None, doc="benchmark CSV (enables information ratio)"),
    Key("data.nav", _optional(_str), None, doc="stored NAV CSV for the metrics command"),

    Key("smart_beta.pe_min", _float, 0.0),
    Key("smart_beta.pe_max", _float, 15.0),
    Key("smart_beta.dy_min", _float, 0.01, _non_negative),
    Key("smart_beta.dy_max", _optional(_float), None, doc="empty = no upper bound"),
    Key("smart_beta.fee_rate", _float, 0.00035, _fraction),
    Key("smart_beta.initial_capital", _float, 500_000_000.0, _positive),
    Key("smart_beta.start_date", _optional(date.fromisoformat), None),
    Key("smart_beta.end_date", _optional(date.fromisoformat), None),
    Key("smart_beta.allow_stale_prices", _bool, False),
    Key("smart_beta.periods_per_year", _int, 12, _positive),

    Key("market_maker.step", _float, 1.8, _positive),
    Key("market_maker.inventory_coeff", _float, 0.02, _non_negative),
    Key("market_maker.fee_points", _float, 0.2, _non_negative),
    Key("market_maker.refresh_interval", _float, 15.0, _positive),
    Key("market_maker.initial_capital", _float, 500_000_000.0, _positive),
    Key("market_maker.point_value", _float, 100_000.0, _positive),
    Key("market_maker.start", _optional(parse_timestamp), None),
    Key("market_maker.end", _optional(parse_timestamp), None),
    Key("market_maker.periods_per_year", _int, 252, _positive),

    Key("metrics.rf_annual", _float, 0.06),
    Key("metrics.periods_per_year", _int, 252, _positive),
    Key("metrics.annualize_ir", _bool, False),

    Key("optimizer.seed", _int, 2025, _non_negative),
    Key("optimizer.n_trials", _int, 100, _at_least_one),
    Key("optimizer.workers", _int, 1, _at_least_one),
    Key("optimizer.min_qualified", _int, 5, _non_negative),
    Key("optimizer.dy_cap", _float, 1.0, _positive, doc="finite stand-in for an unbounded yield ceiling"),
    Key("optimizer.pe_min_range", _range, (0.0, 10.0), _ordered),
    Key("optimizer.pe_max_range", _range, (10.0, 30.0), _ordered),
    Key("optimizer.dy_min_range", _range, (0.0, 0.05), _ordered),
    Key("optimizer.dy_max_range", _range, (0.05, math.inf), _ordered, doc="upper is capped at dy_cap"),
    Key("optimizer.step_range", _range, (0.5, 5.0), _ordered),
)

KEYS = {k.name: k for k in SCHEMA}
PATH_KEYS = ("data.ticks", "data.fundamentals", "data.benchmark", "data.nav")
# execution settings that cannot change results; left out of the config hash
EXECUTION_KEYS = frozenset({"optimizer.workers"})


class Config(dict):
    """Resolved configuration: every schema key mapped to a parsed value."""

    base_dir: Path = Path(".")

    def path(self, key: str) -> Optional[Path]:
        value = self[key]
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def section(self, prefix: str) -> dict[str, Any]:
        return {k.split(".", 1)[1]: v for k, v in self.items() if k.startswith(prefix + ".")}

    def canonical(self) -> str:
        """Sorted ``key = value`` text; the input to the config hash."""
        return "".join(f"{k} = {format_value(self[k])}\n" for k in sorted(self) if k not in EXECUTION_KEYS)


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(format_value(v) for v in value)
    if isinstance(value, (date, datetime)):
        return value.isoformat()
    return str(value)


def defaults() -> Config:
    cfg = Config({k.name: k.default for k in SCHEMA})
    return cfg


def set_value(cfg: Config, key: str, text: str) -> None:
    entry = KEYS.get(key)
    if entry is None:
        raise UnknownKey(f"unknown key {key!r}")
    try:
        value = entry.parse(text)
    except ValueError as exc:
        raise InvalidValue(key, f"cannot parse {text!r}: {exc}") from None
    if entry.check is not None and value is not None:
        problem = entry.check(value)
        if problem:
            raise InvalidValue(key, problem)
    cfg[key] = value


def parse_config(text: str, base_dir: Path = Path(".")) -> Config:
    cfg = defaults()
    cfg.base_dir = base_dir
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError(f"line {lineno}: missing key")
        if key in seen:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        set_value(cfg, key, value)
    validate(cfg)
    return cfg


def validate(cfg: Config) -> None:
    """Cross-key checks that single-key validators cannot express."""
    if not cfg["smart_beta.pe_min"] < cfg["smart_beta.pe_max"]:
        raise InvalidValue("smart_beta.pe_max", "must exceed smart_beta.pe_min")
    dy_max = cfg["smart_beta.dy_max"]
    if dy_max is not None and not cfg["smart_beta.dy_min"] < dy_max:
        raise InvalidValue("smart_beta.dy_max", "must exceed smart_beta.dy_min")
    s, e = cfg["smart_beta.start_date"], cfg["smart_beta.end_date"]
    if s and e and not s < e:
        raise InvalidValue("smart_beta.end_date", "must be after smart_beta.start_date")
    s, e = cfg["market_maker.start"], cfg["market_maker.end"]
    if s and e and not s < e:
        raise InvalidValue("market_maker.end", "must be after market_maker.start")
    if cfg["optimizer.dy_max_range"][0] >= cfg["optimizer.dy_cap"]:
        raise InvalidValue("optimizer.dy_max_range", "lower bound must be below optimizer.dy_cap")


def load_config(path) -> Config:
    path = Path(path)
    if not path.is_file():
        raise DataFileNotFound(f"no such config file: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 text ({exc})") from None
    return parse_config(text, path.parent)
