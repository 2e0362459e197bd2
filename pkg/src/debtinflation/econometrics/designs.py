"""Panel research designs built on :func:`within_fe_ols` and :func:`tsls`.

All functions take a long firm-year ``DataFrame`` and column names.  Rows
with missing values in any used column are dropped before estimation.
Controls are time-invariant firm characteristics and enter interacted with
the post indicator (difference-in-differences) or with year indicators
(event study, debt-inflation regression).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .core import EstimationError, RegressionResult, group_codes, ols, tsls, within_fe_ols

__all__ = [
    "EventStudyResult",
    "did",
    "did_iv",
    "event_study",
    "debt_inflation_regression",
    "long_difference",
    "firm_log_change",
    "economic_magnitude",
]

LEVERAGE_SD = 0.18


def economic_magnitude(beta: float, sd: float = LEVERAGE_SD) -> float:
    """Effect of a one-standard-deviation change in leverage."""
    return beta * sd


def _complete(panel: pd.DataFrame, cols: Sequence[str]) -> pd.DataFrame:
    missing = [c for c in cols if c not in panel.columns]
    if missing:
        raise EstimationError(f"panel lacks columns: {', '.join(missing)}")
    return panel.dropna(subset=list(cols))


def _time_effect(df: pd.DataFrame, time: str, industry: str, industry_year: bool):
    if industry_year:
        return group_codes(df[industry].to_numpy(), df[time].to_numpy())
    return df[time].to_numpy()


def did(panel: pd.DataFrame, y: str = "log_employment_x100", leverage: str = "leverage_1917",
        post_year: int = 1920, controls: Sequence[str] = (), industry_year: bool = False,
        unit: str = "firm_id", time: str = "year", industry: str = "industry_id",
        cluster: str | None = None) -> RegressionResult:
    """Difference-in-differences on ``leverage x 1{year >= post_year}``.

    Firm effects plus year (or industry-by-year) effects; errors clustered by
    firm unless ``cluster`` names another column.
    """
    cols = [y, leverage, unit, time, *controls] + ([industry] if industry_year else []) + \
        ([cluster] if cluster else [])
    df = _complete(panel, cols)
    post = (df[time].to_numpy() >= post_year).astype(float)
    if post.all() or not post.any():
        raise EstimationError(f"no variation in the post-{post_year} indicator")
    X = [df[leverage].to_numpy() * post] + [df[c].to_numpy() * post for c in controls]
    names = [f"{leverage}_x_post"] + [f"{c}_x_post" for c in controls]
    res = within_fe_ols(df[y].to_numpy(), np.column_stack(X), df[unit].to_numpy(),
                        _time_effect(df, time, industry, industry_year),
                        clusters=df[cluster].to_numpy() if cluster else None, names=names)
    res.diagnostics["economic_magnitude"] = economic_magnitude(res.params[0])
    return res


def did_iv(panel: pd.DataFrame, y: str = "log_employment_x100", endog: str = "leverage_1918",
           instrument: str = "leverage_1917", post_year: int = 1920,
           controls: Sequence[str] = (), industry_year: bool = False,
           unit: str = "firm_id", time: str = "year",
           industry: str = "industry_id") -> RegressionResult:
    """Difference-in-differences with ``endog x post`` instrumented by ``instrument x post``."""
    cols = [y, endog, instrument, unit, time, *controls] + ([industry] if industry_year else [])
    df = _complete(panel, cols)
    post = (df[time].to_numpy() >= post_year).astype(float)
    W = np.column_stack([df[c].to_numpy() * post for c in controls]) if controls else None
    return tsls(df[y].to_numpy(), df[endog].to_numpy() * post,
                df[instrument].to_numpy() * post, exog=W,
                unit=df[unit].to_numpy(), time=_time_effect(df, time, industry, industry_year),
                names=[f"{endog}_x_post"] + [f"{c}_x_post" for c in controls],
                instrument_names=[f"{instrument}_x_post"])


@dataclass
class EventStudyResult:
    """Coefficient path on ``leverage x 1{year = y}`` relative to ``base_year``."""

    table: pd.DataFrame
    regression: RegressionResult
    base_year: int

    def beta(self, year: int) -> float:
        return float(self.table.set_index("year").loc[year, "beta"])

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("year,beta,se,ci_lo,ci_hi\n")
            for r in self.table.itertuples(index=False):
                fh.write(f"{int(r.year)},{r.beta:.17g},{r.se:.17g},{r.ci_lo:.17g},{r.ci_hi:.17g}\n")


def event_study(panel: pd.DataFrame, y: str = "log_employment_x100",
                leverage: str = "leverage_1917", base_year: int = 1918,
                controls: Sequence[str] = (), industry_year: bool = False,
                years: Sequence[int] | None = None, unit: str = "firm_id",
                time: str = "year", industry: str = "industry_id",
                level: float = 0.95) -> EventStudyResult:
    """Dynamic difference-in-differences with ``base_year`` as the omitted year.

    Controls enter interacted with every non-base year indicator.
    """
    cols = [y, leverage, unit, time, *controls] + ([industry] if industry_year else [])
    df = _complete(panel, cols)
    present = sorted(int(v) for v in df[time].unique())
    if base_year not in present:
        raise EstimationError(f"base year {base_year} not present in the panel")
    if years is None:
        years = [v for v in present if v != base_year]
    else:
        years = sorted(int(v) for v in years)
        if base_year in years:
            raise EstimationError(f"cannot estimate an interaction for the base year {base_year}")
    t = df[time].to_numpy()
    lev = df[leverage].to_numpy()
    X, names = [], []
    for yr in years:
        X.append(lev * (t == yr))
        names.append(f"{leverage}_x_{yr}")
    for c in controls:
        v = df[c].to_numpy()
        for yr in years:
            X.append(v * (t == yr))
            names.append(f"{c}_x_{yr}")
    res = within_fe_ols(df[y].to_numpy(), np.column_stack(X), df[unit].to_numpy(),
                        _time_effect(df, time, industry, industry_year), names=names)
    ci = res.conf_int(level)
    k = len(years)
    table = pd.DataFrame({"year": years, "beta": res.params[:k], "se": res.se[:k],
                          "ci_lo": ci[:k, 0], "ci_hi": ci[:k, 1]})
    return EventStudyResult(table=table, regression=res, base_year=base_year)


def debt_inflation_regression(panel: pd.DataFrame, shock: pd.DataFrame,
                              y: str = "log_employment_x100", lags: int = 1,
                              controls: Sequence[str] = (), industry_year: bool = False,
                              unit: str = "firm_id", time: str = "year",
                              industry: str = "industry_id",
                              shock_col: str = "debt_inflation") -> RegressionResult:
    """Regress the outcome on the contemporaneous debt-inflation shock and its lags.

    ``shock`` is a firm-year table with columns ``unit``, ``time`` and
    ``shock_col``.  The estimation sample starts ``lags`` years after the
    first shock year.  A missing lag inside the sample raises.  The joint
    Wald test of all shock terms is stored in ``diagnostics``.
    """
    if lags < 0:
        raise ValueError("lags must be nonnegative")
    need = [unit, time, shock_col]
    if any(c not in shock.columns for c in need):
        raise EstimationError(f"shock table needs columns {need}")
    s = shock[need].dropna()
    if s.duplicated([unit, time]).any():
        raise EstimationError("shock table has duplicate firm-years")
    first = int(s[time].min())
    cols = [y, unit, time, *controls] + ([industry] if industry_year else [])
    df = _complete(panel, cols)
    df = df[df[time] >= first + lags].copy()
    terms = []
    for lag in range(lags + 1):
        name = shock_col if lag == 0 else f"{shock_col}_lag{lag}"
        shifted = s.assign(**{time: s[time] + lag}).rename(columns={shock_col: name})
        df = df.merge(shifted, on=[unit, time], how="left")
        miss = df[name].isna()
        if miss.any():
            first_miss = df.index[miss][0]
            raise EstimationError(f"missing lag coverage: no {shock_col} for firm "
                                  f"{df.at[first_miss, unit]} in year "
                                  f"{int(df.at[first_miss, time]) - lag}")
        terms.append(name)
    t = df[time].to_numpy()
    yrs = sorted(int(v) for v in np.unique(t))[1:]
    X = [df[c].to_numpy() for c in terms]
    names = list(terms)
    for c in controls:
        v = df[c].to_numpy()
        for yr in yrs:
            X.append(v * (t == yr))
            names.append(f"{c}_x_{yr}")
    res = within_fe_ols(df[y].to_numpy(), np.column_stack(X), df[unit].to_numpy(),
                        _time_effect(df, time, industry, industry_year), names=names)
    F, p = res.wald_test(terms)
    res.diagnostics.update(joint_terms=terms, joint_F=F, joint_p=p)
    return res


def firm_log_change(panel: pd.DataFrame, column: str, start: int, end: int,
                    deflator: dict | pd.Series | None = None, already_log: bool = False,
                    unit: str = "firm_id", time: str = "year") -> pd.Series:
    """Per-firm change of ``column`` between two years, in log points times 100.

    ``deflator`` maps years to price levels; levels are deflated before
    taking logs.  With ``already_log=True`` the column is differenced as is.
    Firms lacking either endpoint raise.
    """
    wide = panel.pivot_table(index=unit, columns=time, values=column, aggfunc="first")
    for yr in (start, end):
        if yr not in wide.columns:
            raise EstimationError(f"no observations for endpoint year {yr}")
    a, b = wide[start], wide[end]
    missing = a.isna() | b.isna()
    if missing.any():
        firms = list(wide.index[missing][:5])
        raise EstimationError(f"{int(missing.sum())} firms lack an endpoint "
                              f"{start}/{end} for {column} (e.g. {firms})")
    if already_log:
        return (b - a).rename(f"d_{column}")
    if (a <= 0).any() or (b <= 0).any():
        raise EstimationError(f"{column} must be positive to take logs")
    if deflator is not None:
        a = a / deflator[start]
        b = b / deflator[end]
    return (100.0 * (np.log(b) - np.log(a))).rename(f"d_{column}")


def long_difference(firms: pd.DataFrame, y: str, leverage: str = "leverage_1917",
                    controls: Sequence[str] = (), lagged_dep: str | None = None,
                    industry: str | None = None) -> RegressionResult:
    """Cross-sectional regression of a long change on initial leverage, HC1 errors.

    ``lagged_dep`` adds a pre-period change of the outcome as a control;
    ``industry`` adds industry intercepts.
    """
    cols = [y, leverage, *controls] + ([lagged_dep] if lagged_dep else []) + \
        ([industry] if industry else [])
    df = _complete(firms, cols)
    X = [df[leverage].to_numpy()] + [df[c].to_numpy() for c in controls]
    names = [leverage] + list(controls)
    if lagged_dep:
        X.append(df[lagged_dep].to_numpy())
        names.append(lagged_dep)
    if industry:
        levels = sorted(df[industry].unique())
        for lv in levels[1:]:
            X.append((df[industry].to_numpy() == lv).astype(float))
            names.append(f"{industry}_{lv}")
    return ols(df[y].to_numpy(), np.column_stack(X), names=names, cov_type="HC1")
