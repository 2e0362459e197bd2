"""Cross-sectional return tests: Fama-MacBeth regressions, characteristic sorts, binned means."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from ..panel import quantile_buckets
from .core import EstimationError, absorb

__all__ = [
    "FamaMacBethResult",
    "PortfolioResult",
    "market_betas",
    "fama_macbeth",
    "portfolio_sort",
    "binned_means",
]

log = logging.getLogger(__name__)


def market_betas(df: pd.DataFrame, ret: str = "return", market: str = "market",
                 firm: str = "firm_id") -> pd.Series:
    """Full-sample slope of each firm's return on the market return."""
    out = {}
    for fid, g in df[[firm, ret, market]].dropna().groupby(firm, sort=True):
        m = g[market].to_numpy()
        r = g[ret].to_numpy()
        mc = m - m.mean()
        denom = float(mc @ mc)
        out[fid] = float(mc @ (r - r.mean())) / denom if len(g) >= 2 and denom > 0 else math.nan
    return pd.Series(out, name="market_beta")


@dataclass
class FamaMacBethResult:
    """Time-series averages of per-period cross-sectional slopes."""

    names: list[str]
    coef: np.ndarray
    se: np.ndarray
    n_periods: int
    n_skipped: int
    slopes: pd.DataFrame

    @property
    def tstats(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coef / self.se

    def to_frame(self) -> pd.DataFrame:
        from scipy import stats
        t = self.tstats
        p = 2.0 * stats.t.sf(np.abs(t), self.n_periods - 1)
        return pd.DataFrame({"term": self.names, "estimate": self.coef, "se": self.se,
                             "t": t, "p": p})

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("term,estimate,se,t,p\n")
            for r in self.to_frame().itertuples(index=False):
                fh.write(",".join([r.term] + [f"{v:.17g}" for v in r[1:]]) + "\n")


def fama_macbeth(df: pd.DataFrame, ret: str = "return", chars: Sequence[str] = ("leverage_lag",),
                 period: str = "year", firm: str = "firm_id", market_beta: bool = False,
                 market: str = "market") -> FamaMacBethResult:
    """Average per-period OLS slopes of returns on characteristics.

    Standard errors are the time-series standard deviation of the slopes over
    the square root of the number of periods.  With ``market_beta`` each
    firm's full-sample market beta is added as a constant-per-firm regressor.
    Periods whose cross-section is rank deficient are skipped with a warning.
    """
    chars = list(chars)
    data = df.copy()
    if market_beta:
        betas = market_betas(data, ret, market, firm)
        data["market_beta"] = data[firm].map(betas)
        chars = chars + ["market_beta"]
    data = data.dropna(subset=[ret, period, *chars])
    names = ["const"] + chars
    rows, skipped = [], 0
    for t, g in data.groupby(period, sort=True):
        X = np.column_stack([np.ones(len(g))] + [g[c].to_numpy(dtype=float) for c in chars])
        if len(g) <= X.shape[1] or np.linalg.matrix_rank(X) < X.shape[1]:
            skipped += 1
            log.warning("skipping period %s: cross-section not estimable", t)
            continue
        b, *_ = np.linalg.lstsq(X, g[ret].to_numpy(dtype=float), rcond=None)
        rows.append([t, *b])
    if len(rows) < 2:
        raise EstimationError(f"need at least two estimable periods, got {len(rows)}")
    slopes = pd.DataFrame(rows, columns=[period] + names)
    B = slopes[names].to_numpy()
    T = B.shape[0]
    coef = B.mean(axis=0)
    se = B.std(axis=0, ddof=1) / math.sqrt(T)
    return FamaMacBethResult(names=names, coef=coef, se=se, n_periods=T,
                             n_skipped=skipped, slopes=slopes)


@dataclass
class PortfolioResult:
    """Equal-weighted bucket means of a lagged characteristic and returns.

    Means pool all firm-periods in a bucket; standard errors are the pooled
    standard deviation over the square root of the count.
    """

    table: pd.DataFrame
    hml: float
    hml_se: float
    assignments: pd.Series
    by_period: pd.DataFrame

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("bucket,n,char_mean,char_se,ret_mean,ret_se\n")
            for r in self.table.itertuples(index=False):
                fh.write(f"{r.bucket},{int(r.n)},{r.char_mean:.17g},{r.char_se:.17g},"
                         f"{r.ret_mean:.17g},{r.ret_se:.17g}\n")
            fh.write(f"HML,,,,{self.hml:.17g},{self.hml_se:.17g}\n")


def portfolio_sort(df: pd.DataFrame, ret: str = "return", char: str = "leverage_lag",
                   period: str = "year", firm: str = "firm_id", k: int = 5) -> PortfolioResult:
    """Sort firms each period into ``k`` buckets on a lagged characteristic.

    Breakpoints are nearest-rank and firms tied at a breakpoint go to the
    lower bucket.
    """
    data = df.dropna(subset=[ret, char, period, firm])
    if data.empty:
        raise EstimationError("no complete firm-periods to sort")
    bucket = pd.Series(0, index=data.index, dtype=int)
    for t, g in data.groupby(period, sort=True):
        if len(g) < k:
            raise EstimationError(f"period {t} has {len(g)} firms, fewer than {k} buckets")
        bucket.loc[g.index] = quantile_buckets(g[char].to_numpy(), k)
    data = data.assign(bucket=bucket)

    def mean_se(s: pd.Series):
        n = len(s)
        return s.mean(), (s.std(ddof=1) / math.sqrt(n) if n > 1 else math.nan)

    rows = []
    for b in range(1, k + 1):
        g = data[data["bucket"] == b]
        cm, cs = mean_se(g[char])
        rm, rs = mean_se(g[ret])
        rows.append({"bucket": b, "n": len(g), "char_mean": cm, "char_se": cs,
                     "ret_mean": rm, "ret_se": rs})
    table = pd.DataFrame(rows)
    if table["n"].iloc[0] == 0 or table["n"].iloc[-1] == 0:
        raise EstimationError("an extreme bucket is empty: the characteristic has too many ties")
    hml = float(table["ret_mean"].iloc[-1] - table["ret_mean"].iloc[0])
    hml_se = float(math.hypot(table["ret_se"].iloc[-1], table["ret_se"].iloc[0]))
    by_period = data.groupby([period, "bucket"])[ret].mean().unstack("bucket")
    by_period["HML"] = by_period[k] - by_period[1]
    return PortfolioResult(table=table, hml=hml, hml_se=hml_se,
                           assignments=data["bucket"], by_period=by_period)


def binned_means(x, y, n_bins: int = 20, controls=None, groups=None) -> pd.DataFrame:
    """Means of ``x`` and ``y`` within equal-count bins of ``x``.

    With ``controls`` and/or ``groups`` both variables are first residualized
    on them (plus a constant) and their sample means are added back.  The
    observation with 0-based rank ``r`` in ``x`` (ties by position) falls in
    bin ``floor(r * n_bins / n)``.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n = x.size
    if y.size != n:
        raise ValueError("x and y differ in length")
    if n < n_bins:
        raise EstimationError(f"need at least {n_bins} observations, got {n}")
    xr, yr = x, y
    if controls is not None or groups is not None:
        M = np.column_stack([x, y])
        if groups is not None:
            M = absorb(M, [np.asarray(groups)])
            C = None if controls is None else absorb(np.asarray(controls, dtype=float).reshape(n, -1),
                                                     [np.asarray(groups)])
        else:
            C = np.asarray(controls, dtype=float).reshape(n, -1)
            C = np.column_stack([np.ones(n), C])
        if C is not None:
            coef, *_ = np.linalg.lstsq(C, M, rcond=None)
            M = M - C @ coef
        xr = M[:, 0] + x.mean()
        yr = M[:, 1] + y.mean()
    order = np.argsort(xr, kind="stable")
    rank = np.empty(n, dtype=int)
    rank[order] = np.arange(n)
    bins = rank * n_bins // n
    frame = pd.DataFrame({"bin": bins, "x": xr, "y": yr})
    out = frame.groupby("bin", sort=True).agg(n=("x", "size"), x_mean=("x", "mean"),
                                              y_mean=("y", "mean")).reset_index()
    return out
