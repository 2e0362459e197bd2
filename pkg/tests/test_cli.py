import datetime as dt
import json

import numpy as np
import pandas as pd
import pytest

from debtinflation.calibration import default_calibration_text, default_params
from debtinflation.cli import main
from debtinflation.model import SWEEP_COLUMNS, menu_cost_equilibrium


def run(tmp_path, *argv):
    return main([str(a) for a in argv])


def test_eq_sweep_singleton_equals_library_call(tmp_path):
    out = tmp_path / "s.csv"
    assert run(tmp_path, "eq-sweep", "--pmin", 2.5, "--pmax", 2.5, "--points", 1, "--out", out) == 0
    df = pd.read_csv(out, float_precision="round_trip")
    assert list(df.columns) == SWEEP_COLUMNS + ["lambda_ok", "error"]
    ref = menu_cost_equilibrium(2.5, default_params())
    assert df["L"].iloc[0] == ref.L and df["regime"].iloc[0] == ref.regime
    manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "eq-sweep" and manifest["version"] == "0.1.0"
    assert "timestamp" not in json.dumps(manifest)


def test_eq_sweep_rerun_is_bit_identical(tmp_path):
    a, b = tmp_path / "a" / "s.csv", tmp_path / "b" / "s.csv"
    for out in (a, b):
        assert run(tmp_path, "eq-sweep", "--points", 40, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()


def test_invalid_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(default_calibration_text() + "gamma = 3\n")
    assert run(tmp_path, "eq-sweep", "--config", cfg, "--out", tmp_path / "x.csv") == 2
    assert "unknown key 'gamma'" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()
    assert run(tmp_path, "eq-sweep", "--config", tmp_path / "none.cfg",
               "--out", tmp_path / "x.csv") == 2


def test_config_is_hashed_in_manifest(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(default_calibration_text())
    out = tmp_path / "s.csv"
    assert run(tmp_path, "eq-sweep", "--config", cfg, "--points", 5, "--out", out) == 0
    manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    import hashlib
    assert manifest["inputs"][str(cfg)] == hashlib.sha256(cfg.read_bytes()).hexdigest()


def test_unknown_flag_and_bad_grid_exit_2(tmp_path):
    assert run(tmp_path, "eq-sweep", "--bogus", "--out", tmp_path / "x.csv") == 2
    assert run(tmp_path, "eq-sweep", "--pmin", 5, "--pmax", 1, "--out", tmp_path / "x.csv") == 2
    assert run(tmp_path) == 2


def test_default_curve(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert run(tmp_path, "default-curve", "--firm-mass", 100, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "P,log_inflation,default_count"
    df = pd.read_csv(out)
    assert np.all(np.diff(df["default_count"]) <= 0)
    assert "second difference" in capsys.readouterr().out


def test_simulate_requires_seed(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--out", tmp_path / "p.csv") == 2
    assert "--seed is required" in capsys.readouterr().err
    assert run(tmp_path, "duration", "--out", tmp_path / "d.csv") == 2


def test_simulate_then_estimate_recovers_beta(tmp_path):
    cfg = tmp_path / "panel.cfg"
    cfg.write_text("n_firms = 300\n")
    panel = tmp_path / "panel.csv"
    assert run(tmp_path, "simulate", "--panel-config", cfg, "--seed", 11, "--out", panel) == 0
    manifest = json.loads((tmp_path / "panel.csv.manifest.json").read_text())
    assert manifest["seed"] == 11 and str(cfg) in manifest["inputs"]
    out = tmp_path / "did.csv"
    assert run(tmp_path, "estimate", "--spec", "did", "--in", panel, "--out", out) == 0
    res = pd.read_csv(out)
    assert list(res.columns) == ["term", "estimate", "se", "t", "p"]
    assert abs(res["estimate"].iloc[0] - 41.6) < 2.5 * res["se"].iloc[0]
    for spec in ("iv", "event", "longdiff"):
        assert run(tmp_path, "estimate", "--spec", spec, "--in", panel,
                   "--out", tmp_path / f"{spec}.csv") == 0
    assert pd.read_csv(tmp_path / "event.csv").columns.tolist() == \
        ["year", "beta", "se", "ci_lo", "ci_hi"]


def _annual_prices(path):
    levels = {1913: 1.0, 1914: 1.0, 1915: 1.1, 1916: 1.3, 1917: 1.5, 1918: 2.0, 1919: 4.0,
              1920: 14.0, 1921: 20.0, 1922: 300.0, 1923: 1e9}
    path.write_text("date,level\n" + "".join(f"{y}-12-31,{v}\n" for y, v in levels.items()))


def test_estimate_shock_and_debt_shock(tmp_path, capsys):
    panel = tmp_path / "panel.csv"
    assert run(tmp_path, "simulate", "--seed", 2, "--out", panel) == 0
    prices = tmp_path / "prices.csv"
    _annual_prices(prices)
    out = tmp_path / "shock.csv"
    assert run(tmp_path, "estimate", "--spec", "shock", "--in", panel, "--prices", prices,
               "--out", out) == 0
    assert pd.read_csv(out)["term"].tolist() == ["debt_inflation", "debt_inflation_lag1"]
    assert "joint F" in capsys.readouterr().out
    assert run(tmp_path, "estimate", "--spec", "shock", "--in", panel,
               "--out", out) == 2
    series = tmp_path / "series.csv"
    assert run(tmp_path, "debt-shock", "--prices", prices, "--frequency", "annual",
               "--leverage", 0.43, "--out", series) == 0
    df = pd.read_csv(series)
    assert list(df.columns) == ["date", "value"]
    assert df["value"].iloc[-1] == pytest.approx(0.43, abs=1e-3)
    table = tmp_path / "table.csv"
    assert run(tmp_path, "debt-shock", "--prices", prices, "--frequency", "annual",
               "--panel", panel, "--out", table) == 0
    assert pd.read_csv(table).columns.tolist() == ["firm_id", "year", "debt_inflation"]


def test_estimation_error_exits_1(tmp_path, capsys):
    panel = tmp_path / "panel.csv"
    assert run(tmp_path, "simulate", "--seed", 1, "--out", panel) == 0
    assert run(tmp_path, "estimate", "--spec", "did", "--in", panel, "--post-year", 1900,
               "--out", tmp_path / "x.csv") == 1
    assert "no variation" in capsys.readouterr().err


def test_malformed_panel_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("firm_id,industry_id,year,leverage_1917\n1,1,1917,0.4\n1,1,1917,0.4\n")
    assert run(tmp_path, "estimate", "--spec", "did", "--in", bad, "--out", tmp_path / "x.csv") == 2
    assert ":3: duplicate" in capsys.readouterr().err


def test_returns_pipeline(tmp_path):
    ret = tmp_path / "r.csv"
    assert run(tmp_path, "simulate", "--kind", "returns", "--seed", 5, "--out", ret) == 0
    assert run(tmp_path, "sort", "--in", ret, "--out", tmp_path / "sort.csv") == 0
    lines = (tmp_path / "sort.csv").read_text().splitlines()
    assert lines[0] == "bucket,n,char_mean,char_se,ret_mean,ret_se" and len(lines) == 7
    assert run(tmp_path, "fmb", "--in", ret, "--chars", "leverage_lag,size", "--market-beta",
               "--out", tmp_path / "fmb.csv") == 0
    assert pd.read_csv(tmp_path / "fmb.csv")["term"].tolist() == \
        ["const", "leverage_lag", "size", "market_beta"]
    assert run(tmp_path, "sort", "--in", tmp_path / "missing.csv", "--out", tmp_path / "x.csv") == 2


def test_duration_modes(tmp_path):
    out = tmp_path / "d.csv"
    assert run(tmp_path, "duration", "--seed", 3, "--months", 24, "--setters", 10, "--out", out) == 0
    assert pd.read_csv(out).columns.tolist() == ["date", "log_inflation_12m", "mean_days"]
    daily = tmp_path / "p.csv"
    days = [dt.date(1920, 1, 1) + dt.timedelta(days=i) for i in range(6)]
    daily.write_text("date,level\n" + "".join(f"{d},{v}\n" for d, v in
                                              zip(days, [1, 2, 2, 2, 3, 3])))
    assert run(tmp_path, "duration", "--in", daily, "--out", out) == 0
    df = pd.read_csv(out)
    assert df.columns.tolist() == ["date", "value"]
    assert df["value"].tolist()[1:] == [0, 1, 2, 0, 1]


@pytest.mark.parametrize("argv", [
    ["simulate", "--seed", "4"],
    ["simulate", "--kind", "returns", "--seed", "4"],
    ["duration", "--seed", "4", "--months", "18", "--setters", "5"],
])
def test_stochastic_subcommands_are_deterministic(tmp_path, argv):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
