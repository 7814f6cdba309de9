import subprocess
import sys
from pathlib import Path

import pytest

from plutus.cli import main
from plutus.metrics import max_drawdown
from plutus.report import load_nav, read_kv, sha256_file

from conftest import write

FIXTURES = Path(__file__).parent / "fixtures" / "readmes"
REPO = Path(__file__).resolve().parents[1]


def outputs(d: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "started_at.txt"}


def run(*args) -> int:
    return main([str(a) for a in args])


def test_backtest_market_maker(datadir, tmp):
    out = tmp / "mm"
    assert run("backtest-market-maker", "--config", datadir / "run.cfg", "--out", out) == 0
    names = set(outputs(out))
    assert {"nav.csv", "drawdown.csv", "inventory.csv", "fills.csv", "metrics.txt", "manifest.txt"} <= names
    m = read_kv(out / "metrics.txt")
    assert "information_ratio" not in m and {"sharpe", "sortino", "max_drawdown"} <= set(m)
    nav = load_nav(out / "nav.csv")
    assert nav.nav[0] == 500_000_000.0
    dd = [float(l.split(",")[1]) for l in (out / "drawdown.csv").read_text().splitlines()[1:]]
    assert min(dd) == max_drawdown(nav) == float(m["max_drawdown"])


def test_constant_price_fixture(datadir, tmp):
    write(datadir / "flat.cfg", "data.ticks = flat.csv\n")
    out = tmp / "flat"
    assert run("backtest-market-maker", "--config", datadir / "flat.cfg", "--out", out) == 0
    assert set(load_nav(out / "nav.csv").nav) == {500_000_000.0}
    assert (out / "fills.csv").read_text() == "timestamp,side,price,fee_points,inventory_after\n"
    assert read_kv(out / "metrics.txt")["sharpe"] == "undefined"


def test_backtest_smart_beta_with_benchmark(datadir, tmp):
    out = tmp / "sb"
    assert run("backtest-smart-beta", "--config", datadir / "run.cfg", "--out", out) == 0
    m = read_kv(out / "metrics.txt")
    assert {"sharpe", "sortino", "information_ratio", "max_drawdown"} <= set(m)
    assert (out / "rebalances.csv").exists()


def test_metrics_on_stored_nav(datadir, tmp):
    sb = tmp / "sb"
    run("backtest-smart-beta", "--config", datadir / "run.cfg", "--out", sb)
    out = tmp / "metrics"
    code = run("metrics", "--config", datadir / "run.cfg", "--out", out,
               "--nav", sb / "nav.csv", "--benchmark", datadir / "benchmark.csv")
    assert code == 0
    m = read_kv(out / "metrics.txt")
    assert set(m) == {"period_start", "period_end", "sharpe", "sortino", "information_ratio", "max_drawdown"}
    assert m["max_drawdown"] == read_kv(sb / "metrics.txt")["max_drawdown"]


@pytest.mark.parametrize("command", [
    "backtest-smart-beta", "backtest-market-maker", "optimize-smart-beta", "optimize-market-maker",
])
def test_byte_determinism(datadir, tmp, command):
    a, b, c = tmp / "a", tmp / "b", tmp / "c"
    assert run(command, "--config", datadir / "run.cfg", "--out", a) == 0
    assert run(command, "--config", datadir / "run.cfg", "--out", b) == 0
    assert run(command, "--config", datadir / "run.cfg", "--out", c, "--workers", 4) == 0
    assert outputs(a) == outputs(b) == outputs(c)
    assert (a / "started_at.txt").exists()


def test_optimize_writes_trial_log(datadir, tmp):
    out = tmp / "opt"
    assert run("optimize-market-maker", "--config", datadir / "run.cfg", "--out", out, "--trials", 5, "--seed", 7) == 0
    lines = (out / "trials.csv").read_text().splitlines()
    assert lines[0] == "trial,step,objective,status" and len(lines) == 6
    manifest = read_kv(out / "manifest.txt")
    assert manifest["seed"] == "7"
    best = read_kv(out / "best.txt")
    assert 0.5 <= float(best["param.step"]) <= 5.0


def test_manifest_tracks_inputs(datadir, tmp):
    run("backtest-market-maker", "--config", datadir / "run.cfg", "--out", tmp / "a")
    m1 = read_kv(tmp / "a" / "manifest.txt")
    assert m1["data.ticks"] == sha256_file(datadir / "ticks.csv")
    with (datadir / "ticks.csv").open("a") as fh:
        fh.write("2030-01-01T02:00:00+00:00,1000.0\n")
    run("backtest-market-maker", "--config", datadir / "run.cfg", "--out", tmp / "b")
    m2 = read_kv(tmp / "b" / "manifest.txt")
    assert m1["data.ticks"] != m2["data.ticks"]
    assert m1["config_hash"] == m2["config_hash"]


def test_error_exit_codes(datadir, tmp, capsys):
    write(datadir / "bad.cfg", "unknown_key = 5\n")
    assert run("backtest-market-maker", "--config", datadir / "bad.cfg", "--out", tmp / "x") == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: config UnknownKey:")

    write(datadir / "bad.cfg", "market_maker.step = -1\n")
    assert run("backtest-market-maker", "--config", datadir / "bad.cfg", "--out", tmp / "x") == 2
    assert run("backtest-market-maker", "--config", datadir / "missing.cfg", "--out", tmp / "x") == 2

    write(datadir / "gone.cfg", "data.ticks = nowhere.csv\n")
    assert run("backtest-market-maker", "--config", datadir / "gone.cfg", "--out", tmp / "x") == 3
    assert "error: data DataFileNotFound" in capsys.readouterr().err

    write(datadir / "empty.csv", "timestamp,price\n2022-01-03T02:00:00Z,\n")
    write(datadir / "empty.cfg", "data.ticks = empty.csv\n")
    assert run("backtest-market-maker", "--config", datadir / "empty.cfg", "--out", tmp / "x") == 3

    write(datadir / "nofund.cfg", "data.ticks = ticks.csv\n")
    assert run("backtest-smart-beta", "--config", datadir / "nofund.cfg", "--out", tmp / "x") == 2

    write(datadir / "allfail.cfg", "data.fundamentals = fundamentals.csv\noptimizer.min_qualified = 1000\noptimizer.n_trials = 3\n")
    assert run("optimize-smart-beta", "--config", datadir / "allfail.cfg", "--out", tmp / "x") == 4
    assert "AllTrialsFailed" in capsys.readouterr().err


def test_check_command(tmp, capsys):
    assert run("check", "--repo", FIXTURES / "full", "--out", tmp) == 0
    assert read_kv(tmp / "compliance.txt")["score"] == "1.0"
    assert run("check", "--repo", FIXTURES / "six_of_seven") == 5
    assert run("check", "--repo", FIXTURES / "no_readme") == 5
    assert "score: 0.0" in capsys.readouterr().out
    assert run("check", "--repo", REPO) == 0


def test_synth_and_module_entry_point(tmp):
    assert run("synth", "--out", tmp / "demo") == 0
    assert {"ticks.csv", "fundamentals.csv", "benchmark.csv", "run.cfg"} <= {p.name for p in (tmp / "demo").iterdir()}
    proc = subprocess.run([sys.executable, "-m", "plutus", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "plutus" in proc.stdout
