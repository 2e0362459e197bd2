"""Command-line entry point: ``debtinflation <subcommand> ...``.

Every subcommand writes its CSV atomically and a ``<out>.manifest.json``
beside it.  Exit status is 0 on success, 1 when an estimation or solver
step fails, and 2 for usage errors and invalid inputs.  Stochastic
subcommands refuse to run without ``--seed``.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from . import __version__
from .calibration import CalibrationError, default_params, load_calibration
from .econometrics import (
    EstimationError,
    debt_inflation_regression,
    did,
    did_iv,
    event_study,
    fama_macbeth,
    firm_log_change,
    long_difference,
    portfolio_sort,
)
from .model import NoEquilibriumError, UnconstrainedFirmError, default_curve, sweep
from .panel import (
    PanelConfig,
    PanelFormatError,
    ReturnsConfig,
    load_config,
    load_panel,
    save_panel,
)
from .shocks import (
    PricePath,
    debt_inflation_panel,
    debt_inflation_series,
    LeverageBase,
    log_inflation,
    mean_duration_by_date,
    simulate_menu_cost_prices,
)

EXIT_OK, EXIT_ESTIMATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Invalid arguments or inputs; reported with exit status 2."""


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@contextlib.contextmanager
def _atomic(path: str | Path):
    """Yield a temporary sibling path and move it onto ``path`` on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else f"{float(v):.17g}"
    return str(v)


def write_frame(df: pd.DataFrame, path: str | Path) -> None:
    """Write a DataFrame as CSV with 17 significant digits and no index."""
    with _atomic(path) as tmp, open(tmp, "w", newline="") as fh:
        fh.write(",".join(map(str, df.columns)) + "\n")
        for row in df.itertuples(index=False):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_with(writer, path: str | Path) -> None:
    with _atomic(path) as tmp:
        writer(tmp)


def write_manifest(args: argparse.Namespace, inputs: Sequence[str | Path]) -> Path:
    out = Path(args.out)
    manifest = {
        "subcommand": args.command,
        "config": getattr(args, "config", None) or getattr(args, "panel_config", None),
        "seed": getattr(args, "seed", None),
        "output": out.name,
        "output_dir": str(out.parent),
        "version": __version__,
        "inputs": {str(p): _sha256(p) for p in inputs if p},
        "arguments": {k: v for k, v in sorted(vars(args).items())
                      if k not in ("command", "func")},
    }
    path = out.with_name(out.name + ".manifest.json")
    with _atomic(path) as tmp:
        tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _params(args):
    return load_calibration(args.config) if args.config else default_params()


def _grid(args) -> np.ndarray:
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    if not 0 < args.pmin <= args.pmax:
        raise UsageError("need 0 < --pmin <= --pmax")
    if args.points == 1:
        return np.array([args.pmin])
    return np.linspace(args.pmin, args.pmax, args.points)


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command}: --seed is required; stochastic subcommands "
                         "never draw an implicit seed")
    return args.seed


def _split(s: str | None) -> list[str]:
    return [c.strip() for c in s.split(",") if c.strip()] if s else []


def cmd_eq_sweep(args) -> list:
    table = sweep(_grid(args), _params(args), kind=args.kind)
    write_frame(table, args.out)
    n_err = int((table["regime"] == "error").sum())
    print(f"{len(table)} price levels, {n_err} failed")
    return [args.config]


def cmd_default_curve(args) -> list:
    curve = default_curve(_grid(args), _params(args), firm_mass=args.firm_mass)
    write_frame(curve, args.out)
    d2 = np.diff(curve["default_count"].to_numpy(), 2)
    tail = d2[len(d2) // 10:]
    if len(tail):
        print(f"min second difference beyond first decile: {tail.min():.3e}")
    return [args.config]


def cmd_simulate(args) -> list:
    seed = _need_seed(args)
    cls = PanelConfig if args.kind == "panel" else ReturnsConfig
    if args.panel_config:
        cfg = load_config(cls, args.panel_config, seed=seed)
    else:
        cfg = cls(seed=seed)
    if args.kind == "panel":
        from .panel import simulate_panel
        _write_with(lambda p: save_panel(simulate_panel(cfg), p), args.out)
    else:
        from .panel import simulate_returns
        write_frame(simulate_returns(cfg), args.out)
    return [args.panel_config]


def _shock_table(panel: pd.DataFrame, prices: PricePath, base_year: int) -> pd.DataFrame:
    lev = panel.groupby("firm_id")["leverage_1917"].first()
    wide = debt_inflation_panel(lev, prices, base_year)
    # annual shock: last observation of each calendar year
    years = pd.Series(wide.columns.year, index=wide.columns)
    last = years.groupby(years).apply(lambda s: s.index[-1])
    annual = wide[list(last)]
    annual.columns = list(last.index)
    long = annual.stack().rename("debt_inflation").reset_index()
    long.columns = ["firm_id", "year", "debt_inflation"]
    return long


def cmd_estimate(args) -> list:
    panel = load_panel(args.input)
    controls = _split(args.controls)
    inputs = [args.input]
    if args.spec == "did":
        res = did(panel, y=args.y, controls=controls, industry_year=args.industry_year,
                  post_year=args.post_year)
    elif args.spec == "iv":
        res = did_iv(panel, y=args.y, controls=controls, industry_year=args.industry_year,
                     post_year=args.post_year)
        print(f"first-stage F = {res.first_stage_f:.3f}"
              + (" (weak instruments)" if res.weak_instruments else ""))
    elif args.spec == "event":
        es = event_study(panel, y=args.y, controls=controls, industry_year=args.industry_year,
                         base_year=args.base_year)
        _write_with(es.to_csv, args.out)
        print(es.table.to_string(index=False))
        return inputs
    elif args.spec == "shock":
        if not args.prices:
            raise UsageError("--spec shock needs --prices")
        prices = PricePath.from_csv(args.prices, frequency=args.frequency)
        shock = _shock_table(panel, prices, args.shock_base_year)
        res = debt_inflation_regression(panel, shock, y=args.y, lags=args.lags,
                                        controls=controls, industry_year=args.industry_year)
        print(f"joint F = {res.diagnostics['joint_F']:.4f}, p = {res.diagnostics['joint_p']:.4g}")
        inputs.append(args.prices)
    else:
        firms = panel.groupby("firm_id").first()
        firms["dy"] = firm_log_change(panel, args.y, args.start, args.end, already_log=True)
        lagged = None
        if args.lagged_start is not None:
            firms["dy_pre"] = firm_log_change(panel, args.y, args.lagged_start, args.start,
                                              already_log=True)
            lagged = "dy_pre"
        res = long_difference(firms, "dy", controls=controls, lagged_dep=lagged)
    _write_with(res.to_csv, args.out)
    print(res.summary())
    return inputs


def _read_csv(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_fmb(args) -> list:
    df = _read_csv(args.input)
    res = fama_macbeth(df, ret=args.ret, chars=_split(args.chars) or ["leverage_lag"],
                       market_beta=args.market_beta)
    _write_with(res.to_csv, args.out)
    print(res.to_frame().to_string(index=False))
    return [args.input]


def cmd_sort(args) -> list:
    df = _read_csv(args.input)
    res = portfolio_sort(df, ret=args.ret, char=args.char, k=args.k)
    _write_with(res.to_csv, args.out)
    print(res.table.to_string(index=False))
    print(f"HML = {res.hml:.6f} (se {res.hml_se:.6f})")
    return [args.input]


def cmd_duration(args) -> list:
    if args.input:
        paths = [PricePath.from_csv(p, frequency="daily") for p in args.input]
        dates = sorted(set().union(*(set(p.dates) for p in paths)))
        md = mean_duration_by_date(paths, dates)
        out = pd.DataFrame({"date": [d.isoformat() for d in dates], "value": md.to_numpy()})
        write_frame(out, args.out)
        return list(args.input)
    seed = _need_seed(args)
    if args.months < 13:
        raise UsageError("--months must be at least 13")
    rates = np.geomspace(args.start_rate, args.end_rate, args.months)
    aggregate, paths = simulate_menu_cost_prices(rates, args.setters, seed)
    infl = log_inflation(aggregate, 12)
    md = mean_duration_by_date(paths, infl.index)
    out = pd.DataFrame({"date": [d.date().isoformat() for d in infl.index],
                        "log_inflation_12m": infl.to_numpy(), "mean_days": md.to_numpy()})
    write_frame(out, args.out)
    from scipy import stats
    rho, p = stats.spearmanr(out["log_inflation_12m"], out["mean_days"])
    print(f"Spearman rho = {rho:.4f}, p = {p:.3g}")
    return []


def cmd_debt_shock(args) -> list:
    prices = PricePath.from_csv(args.prices, frequency=args.frequency)
    if args.panel:
        shock = _shock_table(load_panel(args.panel), prices, args.base_year)
        write_frame(shock, args.out)
        return [args.prices, args.panel]
    if not 0 <= args.leverage <= 1:
        raise UsageError("--leverage must lie in [0, 1]")
    s = debt_inflation_series(LeverageBase("firm", args.leverage, 1 - args.leverage,
                                           args.base_year), prices)
    out = pd.DataFrame({"date": [d.date().isoformat() for d in s.index], "value": s.to_numpy()})
    write_frame(out, args.out)
    return [args.prices]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="debtinflation",
                                     description="Debt-inflation model, shocks and estimators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out", required=True, help="output CSV path")
        return p

    def grid(p, pmin=1.0, pmax=100.0, points=200):
        p.add_argument("--config", help="calibration file (key = value); default calibration if omitted")
        p.add_argument("--pmin", type=float, default=pmin)
        p.add_argument("--pmax", type=float, default=pmax)
        p.add_argument("--points", type=int, default=points)

    p = add("eq-sweep", cmd_eq_sweep, "solve the model over a price-level grid")
    grid(p)
    p.add_argument("--kind", choices=["menu_cost", "flexible", "rigid"], default="menu_cost")

    p = add("default-curve", cmd_default_curve, "default count against log inflation")
    grid(p)
    p.add_argument("--firm-mass", type=float, default=1.0)

    p = add("simulate", cmd_simulate, "simulate a firm panel or a return panel")
    p.add_argument("--kind", choices=["panel", "returns"], default="panel")
    p.add_argument("--panel-config", help="generator settings (key = value)")
    p.add_argument("--seed", type=int)

    p = add("estimate", cmd_estimate, "estimate a panel design")
    p.add_argument("--spec", choices=["did", "event", "iv", "shock", "longdiff"], required=True)
    p.add_argument("--in", dest="input", required=True, help="panel CSV")
    p.add_argument("--y", default="log_employment_x100")
    p.add_argument("--controls", help="comma-separated control columns")
    p.add_argument("--industry-year", action="store_true")
    p.add_argument("--post-year", type=int, default=1920)
    p.add_argument("--base-year", type=int, default=1918, help="omitted event-study year")
    p.add_argument("--prices", help="date,level CSV for --spec shock")
    p.add_argument("--frequency", default="annual",
                   choices=["daily", "monthly", "quarterly", "annual"])
    p.add_argument("--shock-base-year", type=int, default=1917)
    p.add_argument("--lags", type=int, default=1)
    p.add_argument("--start", type=int, default=1918)
    p.add_argument("--end", type=int, default=1923)
    p.add_argument("--lagged-start", type=int, help="adds the change from this year to --start")

    p = add("fmb", cmd_fmb, "Fama-MacBeth regressions")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--ret", default="return")
    p.add_argument("--chars", default="leverage_lag")
    p.add_argument("--market-beta", action="store_true")

    p = add("sort", cmd_sort, "quantile portfolio sort")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--ret", default="return")
    p.add_argument("--char", default="leverage_lag")
    p.add_argument("--k", type=int, default=5)

    p = add("duration", cmd_duration, "days since the last price increase")
    p.add_argument("--in", dest="input", nargs="+", help="daily date,level CSVs")
    p.add_argument("--seed", type=int)
    p.add_argument("--months", type=int, default=60)
    p.add_argument("--setters", type=int, default=50)
    p.add_argument("--start-rate", type=float, default=0.01)
    p.add_argument("--end-rate", type=float, default=1.0)

    p = add("debt-shock", cmd_debt_shock, "debt-inflation shock series")
    p.add_argument("--prices", required=True, help="date,level CSV")
    p.add_argument("--frequency", default="monthly",
                   choices=["daily", "monthly", "quarterly", "annual"])
    p.add_argument("--leverage", type=float, default=0.43)
    p.add_argument("--base-year", type=int, default=1917)
    p.add_argument("--panel", help="panel CSV; writes a firm-year shock table instead")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        inputs = args.func(args)
        write_manifest(args, [p for p in inputs if p])
    except (EstimationError, NoEquilibriumError, UnconstrainedFirmError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except (UsageError, CalibrationError, PanelFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
