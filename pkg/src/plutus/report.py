"""Result files: plot-ready series, flat key-value reports and the run manifest.

Floats are written with ``repr`` (shortest round-trip form) and every file is
written to a temporary sibling and renamed into place, so identical inputs
give byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from . import __version__
from .metrics import NavSeries


@dataclass(frozen=True)
class DrawdownSeries:
    dates: tuple[date, ...]
    drawdown: tuple[float, ...]


@dataclass
class RunManifest:
    command: str
    config_hash: str
    data_hashes: dict[str, str]
    seed: Optional[int]
    tool_version: str = __version__
    started_at: str = ""
    outputs: list[str] = field(default_factory=list)

    def as_items(self) -> list[tuple[str, str]]:
        items = [
            ("command", self.command),
            ("tool_version", self.tool_version),
            ("config_hash", self.config_hash),
            ("seed", "" if self.seed is None else str(self.seed)),
        ]
        items += [(f"data.{name}", digest) for name, digest in sorted(self.data_hashes.items())]
        items += [("output", name) for name in self.outputs]
        return items


def drawdown_series(nav: NavSeries) -> DrawdownSeries:
    """Pointwise ``nav[t] / running_max[t] - 1``.

    Uses the same peak-tracking arithmetic as ``metrics.max_drawdown`` so the
    minimum of this series equals it exactly.
    """
    out = []
    peak = nav.nav[0] if nav.nav else 0.0
    for v in nav.nav:
        if v > peak:
            peak = v
        out.append(v / peak - 1.0)
    return DrawdownSeries(nav.dates, tuple(out))


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def kv_text(items: Iterable[tuple[str, str]], header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines += [f"{k} = {v}" for k, v in items]
    return "\n".join(lines) + "\n"


def write_series(path, name: str, dates: Sequence, values: Sequence) -> Path:
    return atomic_write(path, csv_text(("date", name), zip(dates, values)))


def write_kv(path, items: Iterable[tuple[str, str]], header: Sequence[str] = ()) -> Path:
    return atomic_write(path, kv_text(items, header))


def read_kv(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def hash_inputs(paths: Mapping[str, Optional[Path]]) -> dict[str, str]:
    return {name: sha256_file(p) for name, p in paths.items() if p is not None}


def load_nav(path) -> NavSeries:
    """Read a ``date,nav`` CSV as written by :func:`write_series`."""
    from .errors import EmptySeries, SchemaError
    from .market_data import read_rows

    dates, values = [], []
    for lineno, (d, v) in read_rows(path, ("date", "nav")):
        try:
            dates.append(date.fromisoformat(d.strip()))
            values.append(float(v))
        except ValueError:
            raise SchemaError(f"{path}: line {lineno}: bad row {d},{v}") from None
        if not values[-1] > 0:
            raise SchemaError(f"{path}: line {lineno}: NAV must be positive")
    if not values:
        raise EmptySeries(f"{path}: no NAV rows")
    if any(b <= a for a, b in zip(dates, dates[1:])):
        raise SchemaError(f"{path}: dates must be strictly increasing")
    return NavSeries(tuple(dates), tuple(values))
