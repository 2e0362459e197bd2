"""Price-level analytics: debt erosion, forward premia, inflation and price-spell durations."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

__all__ = [
    "PricePath",
    "LeverageBase",
    "debt_inflation",
    "debt_inflation_series",
    "debt_inflation_panel",
    "debt_inflation_summary",
    "forward_premium",
    "log_inflation",
    "real_total_log_return",
    "duration_since_last_increase",
    "simulate_menu_cost_prices",
    "mean_duration_by_date",
    "write_series_csv",
]

FREQUENCIES = ("daily", "monthly", "quarterly", "annual")
_MONTH_STEP = {"monthly": 1, "quarterly": 3, "annual": 12}


def _to_date(value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    if isinstance(value, (np.datetime64, pd.Timestamp)):
        return pd.Timestamp(value).date()
    return dt.date.fromisoformat(str(value).strip())


@dataclass(frozen=True, eq=False)
class PricePath:
    """Dated, strictly positive price (or wage) levels with strictly increasing dates."""

    dates: tuple
    levels: np.ndarray
    frequency: str = "monthly"

    def __init__(self, dates: Iterable, levels: Iterable[float], frequency: str = "monthly"):
        ds = tuple(_to_date(d) for d in dates)
        lv = np.asarray(list(levels), dtype=float)
        if frequency not in FREQUENCIES:
            raise ValueError(f"frequency must be one of {FREQUENCIES}, got {frequency!r}")
        if len(ds) != lv.size:
            raise ValueError("dates and levels differ in length")
        if any(b <= a for a, b in zip(ds, ds[1:])):
            raise ValueError("dates must be strictly increasing")
        if np.any(~np.isfinite(lv)) or np.any(lv <= 0):
            raise ValueError("price levels must be strictly positive and finite")
        lv.setflags(write=False)
        object.__setattr__(self, "dates", ds)
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "frequency", frequency)

    def __len__(self) -> int:
        return len(self.dates)

    def to_series(self) -> pd.Series:
        return pd.Series(self.levels, index=pd.DatetimeIndex(self.dates), name="level")

    def is_contiguous(self) -> bool:
        """Whether consecutive observations are exactly one period apart."""
        if self.frequency == "daily":
            return all((b - a).days == 1 for a, b in zip(self.dates, self.dates[1:]))
        step = _MONTH_STEP[self.frequency]
        months = [d.year * 12 + d.month for d in self.dates]
        return all(b - a == step for a, b in zip(months, months[1:]))

    @classmethod
    def from_csv(cls, path: str | Path, frequency: str = "monthly") -> "PricePath":
        dates, levels = [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["date", "level"]:
                raise ValueError(f"{path}: header must be 'date,level'")
            for lineno, row in enumerate(reader, start=2):
                try:
                    dates.append(dt.date.fromisoformat(row["date"].strip()))
                    levels.append(float(row["level"]))
                except (ValueError, AttributeError) as exc:
                    raise ValueError(f"{path}:{lineno}: malformed row: {exc}") from None
        return cls(dates, levels, frequency)

    def to_csv(self, path: str | Path) -> None:
        write_series_csv(pd.Series(self.levels, index=list(self.dates)), path,
                         value_name="level")


@dataclass(frozen=True)
class LeverageBase:
    """A firm's pre-inflation liabilities ``D`` and book equity ``E``."""

    firm_id: str
    D: float
    E: float
    base_year: int = 1917

    def __post_init__(self):
        if not self.D >= 0:
            raise ValueError("liabilities must be nonnegative")
        if not self.D + self.E > 0:
            raise ValueError("liabilities plus equity must be positive")
        if not 0 <= self.leverage <= 1:
            raise ValueError("leverage D/(D+E) must lie in [0, 1]")

    @property
    def leverage(self) -> float:
        return self.D / (self.D + self.E)


def debt_inflation(leverage, pi):
    """Fall in initial leverage caused by cumulative inflation ``pi``.

    Equals ``leverage * pi / (1 + pi)``: the real value of debt shrinks by the
    factor ``1 / (1 + pi)``.  Vectorized over both arguments.
    """
    lev = np.asarray(leverage, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= -1):
        raise ValueError("cumulative inflation must exceed -1")
    if np.any((lev < 0) | (lev > 1)):
        raise ValueError("leverage must lie in [0, 1]")
    out = lev * (pi / (1.0 + pi))
    return out[()] if out.ndim == 0 else out


def _base_level(prices: PricePath, base_year: int) -> float:
    idx = [i for i, d in enumerate(prices.dates) if d.year == base_year]
    if not idx:
        raise ValueError(f"price path does not cover base year {base_year}")
    # end-of-year level is the base
    return float(prices.levels[idx[-1]])


def debt_inflation_series(base: LeverageBase, prices: PricePath) -> pd.Series:
    """Debt-inflation shock of one firm at every date of ``prices``.

    Cumulative inflation is measured against the last observation of the
    base year.
    """
    p0 = _base_level(prices, base.base_year)
    pi = prices.levels / p0 - 1.0
    return pd.Series(debt_inflation(base.leverage, pi), index=pd.DatetimeIndex(prices.dates),
                     name=base.firm_id)


def debt_inflation_panel(leverage: pd.Series, prices: PricePath,
                         base_year: int = 1917) -> pd.DataFrame:
    """Firm-by-date matrix of shocks for firms indexed by id with leverage values."""
    p0 = _base_level(prices, base_year)
    pi = prices.levels / p0 - 1.0
    lev = np.asarray(leverage, dtype=float)
    values = debt_inflation(lev[:, None], pi[None, :])
    return pd.DataFrame(np.atleast_2d(values), index=leverage.index,
                        columns=pd.DatetimeIndex(prices.dates))


def debt_inflation_summary(leverage: pd.Series, prices: PricePath,
                           base_year: int = 1917) -> pd.DataFrame:
    """Cross-sectional mean, 10th and 90th percentile of the shock per date."""
    panel = debt_inflation_panel(leverage, prices, base_year)
    return pd.DataFrame({
        "mean": panel.mean(axis=0),
        "p10": panel.quantile(0.10, axis=0),
        "p90": panel.quantile(0.90, axis=0),
    })


def forward_premium(F, S):
    """Annualized premium of a one-month forward rate ``F`` over spot ``S``."""
    F = np.asarray(F, dtype=float)
    S = np.asarray(S, dtype=float)
    if np.any(F <= 0) or np.any(S <= 0):
        raise ValueError("forward and spot rates must be positive")
    out = 12.0 * (F - S) / S
    return out[()] if out.ndim == 0 else out


def log_inflation(prices: PricePath, horizon: int = 1) -> pd.Series:
    """``100 * (ln P_t - ln P_{t-h})`` aligned to ``t``; the first ``h`` dates are dropped."""
    if horizon < 1:
        raise ValueError("horizon must be at least one period")
    if len(prices) < horizon + 1:
        raise ValueError(f"need at least {horizon + 1} observations, got {len(prices)}")
    if not prices.is_contiguous():
        raise ValueError("price path has missing periods; fill the gaps before "
                         "computing period-based inflation")
    logs = np.log(prices.levels)
    return pd.Series(100.0 * (logs[horizon:] - logs[:-horizon]),
                     index=pd.DatetimeIndex(prices.dates[horizon:]), name="log_inflation")


def real_total_log_return(price, dividend, price_prev, deflator, deflator_prev):
    """Real total log return times 100, deflating price and dividend by the price index."""
    args = [np.asarray(a, dtype=float) for a in (price, dividend, price_prev, deflator, deflator_prev)]
    price, dividend, price_prev, deflator, deflator_prev = args
    if np.any(price <= 0) or np.any(price_prev <= 0):
        raise ValueError("prices must be positive")
    if np.any(deflator <= 0) or np.any(deflator_prev <= 0):
        raise ValueError("deflators must be positive")
    if np.any(dividend < 0):
        raise ValueError("dividends must be nonnegative")
    out = 100.0 * np.log((price / deflator + dividend / deflator) / (price_prev / deflator_prev))
    return out[()] if out.ndim == 0 else out


def duration_since_last_increase(series: PricePath) -> pd.Series:
    """Calendar days since the level last rose strictly.

    Zero on the date of an increase; dates before the first increase are
    omitted.  Decreases do not reset the count.
    """
    if len(series) < 2:
        raise ValueError("need at least two observations")
    out_dates, out_vals = [], []
    last = None
    lv = series.levels
    for i, d in enumerate(series.dates):
        if i > 0 and lv[i] > lv[i - 1]:
            last = d
        if last is not None:
            out_dates.append(d)
            out_vals.append((d - last).days)
    return pd.Series(np.asarray(out_vals, dtype=int), index=pd.DatetimeIndex(out_dates),
                     name="days_since_increase")


def mean_duration_by_date(paths: Sequence[PricePath], dates: Sequence) -> pd.Series:
    """Unweighted mean across price setters of days since the last increase at each date."""
    target = pd.DatetimeIndex([pd.Timestamp(_to_date(d)) for d in dates])
    frames = [duration_since_last_increase(p).reindex(target) for p in paths]
    return pd.concat(frames, axis=1).mean(axis=1).rename("mean_days")


def simulate_menu_cost_prices(monthly_inflation: Sequence[float], n_setters: int,
                              seed: int, start: dt.date = dt.date(1919, 1, 1),
                              band_mean: float = 0.10, band_sd: float = 0.02,
                              idio_sd: float = 0.004) -> tuple[PricePath, list[PricePath]]:
    """Simulate daily nominal prices of setters facing a fixed menu cost.

    The aggregate log price level grows at a constant daily rate within each
    month, set by ``monthly_inflation`` (net monthly rates).  Each setter keeps
    its nominal price until its log gap to the desired price (aggregate level
    plus an idiosyncratic random walk) exceeds a setter-specific band, then
    resets to the desired price.

    Returns the monthly aggregate path (first day of each month, plus the day
    after the last month) and one daily path per setter.
    """
    if n_setters < 1:
        raise ValueError("need at least one price setter")
    rates = np.asarray(monthly_inflation, dtype=float)
    if np.any(rates <= -1):
        raise ValueError("monthly inflation must exceed -100%")
    month_starts = [start]
    for _ in rates:
        d = month_starts[-1]
        month_starts.append(dt.date(d.year + d.month // 12, d.month % 12 + 1, 1))
    n_days = (month_starts[-1] - start).days
    daily_growth = np.empty(n_days)
    for i, r in enumerate(rates):
        a = (month_starts[i] - start).days
        b = (month_starts[i + 1] - start).days
        daily_growth[a:b] = math.log1p(r) / (b - a)
    log_agg = np.concatenate([[0.0], np.cumsum(daily_growth)])
    days = [start + dt.timedelta(days=i) for i in range(n_days + 1)]

    ss = np.random.SeedSequence(seed)
    paths = []
    for child in ss.spawn(n_setters):
        rng = np.random.default_rng(child)
        band = max(band_mean + band_sd * rng.standard_normal(), 1e-3)
        desired = log_agg + np.cumsum(idio_sd * rng.standard_normal(n_days + 1))
        p = np.empty(n_days + 1)
        current = desired[0] - band * rng.uniform()
        for t in range(n_days + 1):
            if abs(desired[t] - current) > band:
                current = desired[t]
            p[t] = current
        paths.append(PricePath(days, np.exp(p), "daily"))
    agg_idx = [(d - start).days for d in month_starts]
    aggregate = PricePath(month_starts, np.exp(log_agg[agg_idx]), "monthly")
    return aggregate, paths


def write_series_csv(series: pd.Series, path: str | Path, value_name: str = "value") -> None:
    """Write ``date,<value_name>`` rows with ISO dates and 17 significant digits."""
    with open(path, "w", newline="") as fh:
        fh.write(f"date,{value_name}\n")
        for d, v in series.items():
            fh.write(f"{_to_date(d).isoformat()},{_fmt(v)}\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else f"{v:.17g}"
