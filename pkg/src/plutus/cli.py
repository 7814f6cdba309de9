"""Command-line entry point.

    plutus backtest-smart-beta    --config run.cfg --out results/
    plutus backtest-market-maker  --config run.cfg --out results/
    plutus optimize-smart-beta    --config run.cfg --out results/ [--seed N] [--trials N]
    plutus optimize-market-maker  --config run.cfg --out results/ [--seed N] [--trials N]
    plutus metrics                --config run.cfg --out results/
    plutus check                  --repo path/ [--rules rules.csv] [--out results/]
    plutus synth                  --out data/

Failures print one line ``error: <category> <Kind>: <detail>`` on stderr and
exit 2 (config), 3 (data), 4 (runtime) or 5 (compliance).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, compliance, market_data, metrics, synthetic
from .config import Config, load_config
from .errors import ConfigError, ConstraintViolated, InvalidValue, PlutusError
from .market_maker import MarketMakerConfig, run_market_maker
from .optimizer import Dimension, OptimizationResult, ParamSpace, optimize
from .report import (
    RunManifest,
    atomic_write,
    csv_text,
    drawdown_series,
    hash_inputs,
    load_nav,
    sha256_text,
    write_kv,
    write_series,
)
from .smart_beta import ScreenBounds, SmartBetaConfig, run_smart_beta

log = logging.getLogger("plutus")

EXIT_OK = 0
EXIT_CODES = {"config": 2, "data": 3, "runtime": 4}
EXIT_COMPLIANCE = 5

STARTED_AT = "started_at.txt"


# -- config -> strategy objects ------------------------------------------------

def smart_beta_config(cfg: Config) -> SmartBetaConfig:
    sb = cfg.section("smart_beta")
    return SmartBetaConfig(
        bounds=ScreenBounds(sb["pe_min"], sb["pe_max"], sb["dy_min"], sb["dy_max"]),
        fee_rate=sb["fee_rate"],
        rf_annual=cfg["metrics.rf_annual"],
        initial_capital=sb["initial_capital"],
        start_date=sb["start_date"],
        end_date=sb["end_date"],
        allow_stale_prices=sb["allow_stale_prices"],
    )


def market_maker_config(cfg: Config) -> MarketMakerConfig:
    mm = cfg.section("market_maker")
    return MarketMakerConfig(
        step=mm["step"],
        inventory_coeff=mm["inventory_coeff"],
        fee_points=mm["fee_points"],
        refresh_interval=mm["refresh_interval"],
        initial_capital=mm["initial_capital"],
        point_value=mm["point_value"],
        start=mm["start"],
        end=mm["end"],
    )


def _required_path(cfg: Config, key: str) -> Path:
    p = cfg.path(key)
    if p is None:
        raise InvalidValue(key, "required by this command but not set")
    return p


def _benchmark(cfg: Config) -> Optional[market_data.BenchmarkSeries]:
    p = cfg.path("data.benchmark")
    return market_data.load_benchmark(p) if p is not None else None


def smart_beta_space(cfg: Config) -> ParamSpace:
    cap = cfg["optimizer.dy_cap"]
    lo, hi = cfg["optimizer.dy_max_range"]
    return ParamSpace((
        Dimension("pe_min", *cfg["optimizer.pe_min_range"]),
        Dimension("pe_max", *cfg["optimizer.pe_max_range"]),
        Dimension("dy_min", *cfg["optimizer.dy_min_range"]),
        Dimension("dy_max", lo, min(hi, cap)),
    ))


def smart_beta_objective(cfg: Config, table: market_data.FundamentalTable):
    base = smart_beta_config(cfg)
    min_qualified = cfg["optimizer.min_qualified"]
    ppy = cfg["smart_beta.periods_per_year"]

    def objective(params):
        bounds = ScreenBounds(params["pe_min"], params["pe_max"], params["dy_min"], params["dy_max"])
        result = run_smart_beta(replace(base, bounds=bounds), table)
        if result.min_qualified < min_qualified:
            raise ConstraintViolated(
                f"a month qualified {result.min_qualified} stocks, minimum is {min_qualified}"
            )
        return metrics.sharpe_ratio(metrics.to_returns(result.nav), base.rf_annual, ppy)

    return objective


def market_maker_objective(cfg: Config, ticks: market_data.TickSeries):
    base = market_maker_config(cfg)
    rf = cfg["metrics.rf_annual"]
    ppy = cfg["market_maker.periods_per_year"]

    def objective(params):
        result = run_market_maker(replace(base, step=params["step"]), ticks)
        return metrics.sharpe_ratio(metrics.to_returns(result.nav), rf, ppy)

    return objective


# -- output helpers --------------------------------------------------------------

class Run:
    """Collects emitted files for one command and writes the manifest."""

    def __init__(self, command: str, cfg: Config, out: Path, seed: Optional[int] = None):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.seed = seed
        self.outputs: list[str] = []
        self.inputs: dict[str, Optional[Path]] = {}
        self.started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def emit(self, name: str, text: str) -> None:
        atomic_write(self.out / name, text)
        self.outputs.append(name)

    def emit_nav(self, nav: metrics.NavSeries) -> None:
        write_series(self.out / "nav.csv", "nav", nav.dates, nav.nav)
        dd = drawdown_series(nav)
        write_series(self.out / "drawdown.csv", "drawdown", dd.dates, dd.drawdown)
        self.outputs += ["nav.csv", "drawdown.csv"]

    def emit_metrics(self, report: metrics.MetricsReport, extra=()) -> None:
        header = [f"{self.command} metrics"]
        header += [f"undefined {k}: {why}" for k, why in report.undefined]
        write_kv(self.out / "metrics.txt", list(report.as_items()) + list(extra), header)
        self.outputs.append("metrics.txt")

    def finish(self) -> None:
        manifest = RunManifest(
            command=self.command,
            config_hash=sha256_text(self.cfg.canonical()),
            data_hashes=hash_inputs(self.inputs),
            seed=self.seed,
            outputs=list(self.outputs),
        )
        write_kv(self.out / "manifest.txt", manifest.as_items(), ["plutus run manifest"])
        atomic_write(self.out / STARTED_AT, self.started_at + "\n")


def _trials_csv(result: OptimizationResult, names: Sequence[str]) -> str:
    rows = []
    for t in result.all_trials:
        rows.append([t.index, *(t.params[n] for n in names), t.objective, t.status])
    return csv_text(("trial", *names, "objective", "status"), rows)


# -- commands --------------------------------------------------------------------

def cmd_backtest_smart_beta(cfg: Config, out: Path, params: Optional[dict] = None, run: Optional[Run] = None) -> int:
    run = run or Run("backtest-smart-beta", cfg, out)
    path = _required_path(cfg, "data.fundamentals")
    run.inputs["fundamentals"] = path
    run.inputs["benchmark"] = cfg.path("data.benchmark")
    table = market_data.load_fundamentals(path)
    sb = smart_beta_config(cfg)
    if params:
        sb = replace(sb, bounds=ScreenBounds(params["pe_min"], params["pe_max"], params["dy_min"], params["dy_max"]))
    result = run_smart_beta(sb, table)
    run.emit_nav(result.nav)
    rows = [(r.date, r.nav_before, r.nav_after, r.fees, len(r.qualified)) for r in result.rebalances]
    run.emit("rebalances.csv", csv_text(("date", "nav_before", "nav_after", "fees", "n_qualified"), rows))
    report = metrics.compute_report(
        result.nav, _benchmark(cfg), cfg["metrics.rf_annual"], cfg["smart_beta.periods_per_year"],
        cfg["metrics.annualize_ir"],
    )
    run.emit_metrics(report)
    run.finish()
    return EXIT_OK


def cmd_backtest_market_maker(cfg: Config, out: Path, params: Optional[dict] = None, run: Optional[Run] = None) -> int:
    run = run or Run("backtest-market-maker", cfg, out)
    path = _required_path(cfg, "data.ticks")
    run.inputs["ticks"] = path
    ticks = market_data.load_tick_series(path, cfg["data.instrument"])
    mm = market_maker_config(cfg)
    if params:
        mm = replace(mm, step=params["step"])
    result = run_market_maker(mm, ticks)
    run.emit_nav(result.nav)
    run.emit("inventory.csv", csv_text(("date", "inventory"), zip(result.inventory.dates, result.inventory.inventory)))
    run.emit("fills.csv", csv_text(
        ("timestamp", "side", "price", "fee_points", "inventory_after"),
        ((f.timestamp.isoformat(), f.side, f.price, f.fee_points, f.inventory_after) for f in result.fills),
    ))
    report = metrics.compute_report(result.nav, None, cfg["metrics.rf_annual"], cfg["market_maker.periods_per_year"])
    run.emit_metrics(report, [("fills", str(len(result.fills))), ("final_inventory", str(result.final_state.inventory))])
    run.finish()
    return EXIT_OK


def _optimize(command: str, cfg: Config, out: Path, space: ParamSpace, objective, backtest) -> int:
    seed = cfg["optimizer.seed"]
    run = Run(command, cfg, out, seed=seed)
    result = optimize(space, objective, seed, cfg["optimizer.n_trials"], cfg["optimizer.workers"])
    run.emit("trials.csv", _trials_csv(result, space.names))
    best = result.best_trial
    items = [("trial", str(best.index)), ("objective", repr(best.objective))]
    items += [(f"param.{k}", repr(v)) for k, v in best.params.items()]
    items.append(("failed_trials", str(sum(not t.ok for t in result.all_trials))))
    run.emit("best.txt", "".join(f"{k} = {v}\n" for k, v in items))
    return backtest(cfg, out, params=dict(best.params), run=run)


def cmd_optimize_smart_beta(cfg: Config, out: Path) -> int:
    path = _required_path(cfg, "data.fundamentals")
    table = market_data.load_fundamentals(path)
    return _optimize(
        "optimize-smart-beta", cfg, out, smart_beta_space(cfg), smart_beta_objective(cfg, table),
        cmd_backtest_smart_beta,
    )


def cmd_optimize_market_maker(cfg: Config, out: Path) -> int:
    path = _required_path(cfg, "data.ticks")
    ticks = market_data.load_tick_series(path, cfg["data.instrument"])
    space = ParamSpace((Dimension("step", *cfg["optimizer.step_range"]),))
    return _optimize(
        "optimize-market-maker", cfg, out, space, market_maker_objective(cfg, ticks), cmd_backtest_market_maker,
    )


def cmd_metrics(cfg: Config, out: Path) -> int:
    run = Run("metrics", cfg, out)
    path = _required_path(cfg, "data.nav")
    run.inputs["nav"] = path
    run.inputs["benchmark"] = cfg.path("data.benchmark")
    nav = load_nav(path)
    dd = drawdown_series(nav)
    write_series(out / "drawdown.csv", "drawdown", dd.dates, dd.drawdown)
    run.outputs.append("drawdown.csv")
    report = metrics.compute_report(
        nav, _benchmark(cfg), cfg["metrics.rf_annual"], cfg["metrics.periods_per_year"], cfg["metrics.annualize_ir"],
    )
    run.emit_metrics(report)
    run.finish()
    return EXIT_OK


def cmd_check(repo: Path, rules_path: Optional[Path], out: Optional[Path]) -> int:
    rules = compliance.load_ruleset(rules_path) if rules_path else compliance.default_ruleset()
    report = compliance.check_repo(repo, rules)
    sys.stdout.write(report.to_text())
    if out is not None:
        write_kv(out / "compliance.txt", report.as_items(), [compliance.SCORE_NOTE])
    return EXIT_OK if report.passed else EXIT_COMPLIANCE


def cmd_synth(out: Path, seed: int) -> int:
    """Write a small synthetic dataset plus a config that runs every command on it."""
    out.mkdir(parents=True, exist_ok=True)
    market_data.write_tick_series(synthetic.ou_ticks(20_000, seed), out / "ticks.csv")
    table = synthetic.fundamentals(n_tickers=30, n_months=36, seed=seed)
    market_data.write_fundamentals(table, out / "fundamentals.csv")
    market_data.write_benchmark(synthetic.benchmark(table.months[0], 800, seed=seed), out / "benchmark.csv")
    atomic_write(out / "run.cfg", (
        "# synthetic demo run\n"
        "data.ticks = ticks.csv\n"
        "data.fundamentals = fundamentals.csv\n"
        "data.benchmark = benchmark.csv\n"
        "optimizer.n_trials = 20\n"
    ))
    print(f"wrote synthetic data and run.cfg to {out}")
    return EXIT_OK


COMMANDS = {
    "backtest-smart-beta": cmd_backtest_smart_beta,
    "backtest-market-maker": cmd_backtest_market_maker,
    "optimize-smart-beta": cmd_optimize_smart_beta,
    "optimize-market-maker": cmd_optimize_market_maker,
    "metrics": cmd_metrics,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plutus", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"plutus {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=True)
        p.add_argument("--out", type=Path, default=Path("results"))
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--workers", type=int)
        if name == "metrics":
            p.add_argument("--nav", help="NAV CSV (overrides data.nav)")
            p.add_argument("--benchmark", help="benchmark CSV (overrides data.benchmark)")
    p = sub.add_parser("check")
    p.add_argument("--repo", type=Path, default=Path("."))
    p.add_argument("--rules", type=Path)
    p.add_argument("--out", type=Path)
    p = sub.add_parser("synth")
    p.add_argument("--out", type=Path, default=Path("data"))
    p.add_argument("--seed", type=int, default=2025)
    return parser


def _apply_overrides(cfg: Config, args) -> None:
    for flag, key in (("seed", "optimizer.seed"), ("trials", "optimizer.n_trials"), ("workers", "optimizer.workers")):
        value = getattr(args, flag, None)
        if value is None:
            continue
        if key != "optimizer.seed" and value < 1:
            raise InvalidValue(key, f"--{flag} must be >= 1")
        cfg[key] = value
    for flag, key in (("nav", "data.nav"), ("benchmark", "data.benchmark")):
        value = getattr(args, flag, None)
        if value is not None:
            # command-line paths are relative to the working directory
            cfg[key] = str(Path(value).resolve())


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "check":
            return cmd_check(args.repo, args.rules, args.out)
        if args.command == "synth":
            return cmd_synth(args.out, args.seed)
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        return COMMANDS[args.command](cfg, args.out)
    except PlutusError as exc:
        category = exc.category
        if isinstance(exc, ConfigError) or (args.command != "check" and _is_config_file_error(exc, args)):
            category = "config"
        print(f"error: {category} {exc.kind}: {exc}", file=sys.stderr)
        return EXIT_CODES.get(category, 4)
    except ValueError as exc:
        print(f"error: runtime {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CODES["runtime"]


def _is_config_file_error(exc: PlutusError, args) -> bool:
    config = getattr(args, "config", None)
    return config is not None and isinstance(exc, FileNotFoundError) and not Path(config).is_file()


if __name__ == "__main__":
    sys.exit(main())
