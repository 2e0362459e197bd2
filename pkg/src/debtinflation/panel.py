"""Synthetic firm panels and cleaning/IO for firm-year data.

Generators draw every firm from its own substream,
``SeedSequence(seed, spawn_key=(0, firm_index))``, so a panel generated in
chunks or in parallel is identical to one generated serially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, asdict
from pathlib import Path

import numpy as np
import pandas as pd

__all__ = [
    "PANEL_COLUMNS",
    "REQUIRED_COLUMNS",
    "CONTROL_COLUMNS",
    "PanelConfig",
    "ReturnsConfig",
    "PanelFormatError",
    "simulate_panel",
    "simulate_returns",
    "nearest_rank",
    "quantile_buckets",
    "winsorize_by_group",
    "trim_above",
    "balance_check",
    "load_panel",
    "save_panel",
    "load_config",
    "beta_parameters",
]

PANEL_COLUMNS = [
    "firm_id", "industry_id", "year", "leverage_1917", "log_employment_x100",
    "interest_share", "production_share", "size", "fixed_share", "fcf_assets",
    "margin", "tobins_q", "return",
]
REQUIRED_COLUMNS = ["firm_id", "industry_id", "year", "leverage_1917"]
CONTROL_COLUMNS = ["size", "fixed_share", "fcf_assets", "margin", "tobins_q"]
_SHARE_COLUMNS = ["interest_share", "production_share"]


class PanelFormatError(ValueError):
    pass


def beta_parameters(mean: float, sd: float) -> tuple[float, float]:
    """Beta distribution shape parameters matching a mean and standard deviation."""
    var = sd * sd
    if not (0 < mean < 1) or not (0 < var < mean * (1 - mean)):
        raise ValueError(f"no beta distribution with mean {mean} and sd {sd}")
    common = mean * (1 - mean) / var - 1.0
    return mean * common, (1 - mean) * common


@dataclass(frozen=True)
class PanelConfig:
    """Data-generating process for an employment panel.

    Outcome (log employment times 100)::

        y_it = firm effect + year effect + industry-year shock
               + beta_true * leverage_i * 1{t >= event_year}
               + control_effect * standardized size_i * 1{t >= event_year} + noise
    """

    n_firms: int = 700
    first_year: int = 1914
    last_year: int = 1923
    event_year: int = 1920
    beta_true: float = 41.6
    leverage_mean: float = 0.43
    leverage_sd: float = 0.18
    employment_level: float = 600.0
    firm_effect_sd: float = 120.0
    year_effect_sd: float = 5.0
    n_industries: int = 10
    industry_year_sd: float = 3.0
    noise_sd: float = 25.0
    control_effect: float = 0.0
    gap_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.n_firms < 2:
            problems.append("n_firms must be at least 2")
        if self.first_year >= self.last_year:
            problems.append("year range must span at least two years")
        if not self.first_year < self.event_year <= self.last_year:
            problems.append("event_year must lie inside the year range after its first year")
        for name in ("leverage_sd", "firm_effect_sd", "year_effect_sd",
                     "industry_year_sd", "noise_sd"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be nonnegative")
        if self.n_industries < 1:
            problems.append("n_industries must be positive")
        if not 0 <= self.gap_prob < 1:
            problems.append("gap_prob must lie in [0, 1)")
        if self.leverage_sd > 0:
            try:
                beta_parameters(self.leverage_mean, self.leverage_sd)
            except ValueError as exc:
                problems.append(str(exc))
        elif not 0 <= self.leverage_mean <= 1:
            problems.append("leverage_mean must lie in [0, 1]")
        if problems:
            raise ValueError("invalid panel config: " + "; ".join(problems))

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.first_year, self.last_year + 1)


@dataclass(frozen=True)
class ReturnsConfig:
    """Data-generating process for annual firm returns sorted on lagged leverage.

    ``r_it = beta_i * market_t + premium * score_it + noise``, where
    ``score_it`` is the within-year rank of lagged leverage scaled so that the
    top and bottom ``k`` buckets differ by exactly one unit on average.
    """

    n_firms: int = 700
    first_year: int = 1919
    last_year: int = 1923
    premium: float = 0.10
    k: int = 5
    market_mean: float = -0.20
    market_sd: float = 0.30
    beta_sd: float = 0.20
    noise_sd: float = 0.08
    leverage_mean: float = 0.43
    leverage_sd: float = 0.18
    leverage_persistence: float = 0.8
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.n_firms < self.k:
            problems.append("n_firms must be at least k")
        if self.k < 2:
            problems.append("k must be at least 2")
        if self.first_year > self.last_year:
            problems.append("first_year must not exceed last_year")
        for name in ("market_sd", "beta_sd", "noise_sd", "leverage_sd"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be nonnegative")
        if not 0 <= self.leverage_persistence < 1:
            problems.append("leverage_persistence must lie in [0, 1)")
        if problems:
            raise ValueError("invalid returns config: " + "; ".join(problems))


def _firm_rng(seed: int, firm: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, firm)))


def _draw_leverage(rng, mean, sd):
    if sd == 0:
        return float(mean)
    a, b = beta_parameters(mean, sd)
    return float(rng.beta(a, b))


def simulate_panel(config: PanelConfig) -> pd.DataFrame:
    """Draw a firm-year panel following ``config``.

    Reporting gaps remove rows (never fill them); every firm keeps at least
    two years.  Besides the standard columns the frame carries
    ``leverage_1918``, a noisy later reading of leverage.
    """
    cfg = config
    years = cfg.years
    T = len(years)
    common = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    year_fx = cfg.year_effect_sd * common.standard_normal(T)
    ind_fx = cfg.industry_year_sd * common.standard_normal((cfg.n_industries, T))
    post = (years >= cfg.event_year).astype(float)

    blocks = []
    for i in range(cfg.n_firms):
        rng = _firm_rng(cfg.seed, i)
        lev = _draw_leverage(rng, cfg.leverage_mean, cfg.leverage_sd)
        ind = int(rng.integers(cfg.n_industries))
        alpha = cfg.employment_level + cfg.firm_effect_sd * rng.standard_normal()
        size = 15.0 + 1.5 * rng.standard_normal()
        fixed_share = rng.beta(4.0, 5.0)
        fcf = 0.03 + 0.05 * rng.standard_normal()
        margin = 0.08 + 0.06 * rng.standard_normal()
        q = math.exp(0.3 * rng.standard_normal())
        lev18 = min(max(lev + 0.04 * rng.standard_normal(), 0.0), 1.0)
        eps = cfg.noise_sd * rng.standard_normal(T)
        y = (alpha + year_fx + ind_fx[ind] + cfg.beta_true * lev * post
             + cfg.control_effect * (size - 15.0) / 1.5 * post + eps)
        interest = np.clip(0.06 + 0.12 * lev - 0.10 * lev * post
                           + 0.015 * rng.standard_normal(T), 0.0, 1.0)
        production = np.clip(0.55 - 0.05 * lev + 0.10 * lev * post
                             + 0.04 * rng.standard_normal(T), 0.0, 1.0)
        keep = rng.uniform(size=T) >= cfg.gap_prob
        if keep.sum() < 2:
            keep[:] = False
            keep[[0, -1]] = True
        blocks.append(pd.DataFrame({
            "firm_id": i + 1,
            "industry_id": ind + 1,
            "year": years,
            "leverage_1917": lev,
            "log_employment_x100": y,
            "interest_share": interest,
            "production_share": production,
            "size": size,
            "fixed_share": fixed_share,
            "fcf_assets": fcf,
            "margin": margin,
            "tobins_q": q,
            "return": np.nan,
            "leverage_1918": lev18,
        })[keep])
    return pd.concat(blocks, ignore_index=True)


# ---------------------------------------------------------------------------
# Rank-based helpers (nearest-rank convention throughout)
# ---------------------------------------------------------------------------

def nearest_rank(p: float, n: int) -> int:
    """1-based order statistic used as the ``p``-th percentile of ``n`` values."""
    if n < 1:
        raise ValueError("need at least one value")
    if not 0 <= p <= 1:
        raise ValueError("percentile level must lie in [0, 1]")
    return min(max(1, math.ceil(round(p * n, 9))), n)


def quantile_buckets(values, k: int) -> np.ndarray:
    """Assign values to ``k`` buckets (1..k) by nearest-rank breakpoints.

    The ``j``-th breakpoint is the nearest-rank ``j/k`` percentile.  A value
    goes to the first bucket whose breakpoint it does not exceed, so values
    tied at a breakpoint all fall in the lower bucket.  Without ties, bucket
    sizes differ by at most one.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < k:
        raise ValueError(f"need at least {k} values to form {k} buckets, got {n}")
    s = np.sort(v)
    breaks = np.array([s[nearest_rank(j / k, n) - 1] for j in range(1, k)])
    return np.searchsorted(breaks, v, side="left") + 1


def simulate_returns(config: ReturnsConfig) -> pd.DataFrame:
    """Annual firm returns with a premium on lagged-leverage rank.

    Columns: ``firm_id, year, leverage_lag, market, return, size, mtb``.
    Returns are real log returns in decimal units.
    """
    cfg = config
    years = np.arange(cfg.first_year, cfg.last_year + 1)
    T = len(years)
    common = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    market = cfg.market_mean + cfg.market_sd * common.standard_normal(T)

    lev = np.empty((cfg.n_firms, T))
    beta = np.empty(cfg.n_firms)
    noise = np.empty((cfg.n_firms, T))
    size = np.empty((cfg.n_firms, T))
    mtb = np.empty((cfg.n_firms, T))
    rho = cfg.leverage_persistence
    innov_sd = cfg.leverage_sd * math.sqrt(1 - rho * rho)
    for i in range(cfg.n_firms):
        rng = _firm_rng(cfg.seed, i)
        x = _draw_leverage(rng, cfg.leverage_mean, cfg.leverage_sd)
        for t in range(T):
            lev[i, t] = x
            x = min(max(rho * x + (1 - rho) * cfg.leverage_mean
                        + innov_sd * rng.standard_normal(), 0.0), 1.0)
        beta[i] = 1.0 + cfg.beta_sd * rng.standard_normal()
        noise[i] = cfg.noise_sd * rng.standard_normal(T)
        size[i] = 16.0 + 1.2 * rng.standard_normal() + 0.1 * rng.standard_normal(T)
        mtb[i] = np.exp(0.4 * rng.standard_normal() + 0.1 * rng.standard_normal(T))

    firm_ids = np.arange(1, cfg.n_firms + 1)
    score = np.empty_like(lev)
    for t in range(T):
        buckets = quantile_buckets(lev[:, t], cfg.k)
        order = np.lexsort((firm_ids, lev[:, t]))
        rank = np.empty(cfg.n_firms)
        rank[order] = np.arange(cfg.n_firms, dtype=float)
        spread = rank[buckets == cfg.k].mean() - rank[buckets == 1].mean()
        score[:, t] = rank / spread
    ret = beta[:, None] * market[None, :] + cfg.premium * score + noise
    return pd.DataFrame({
        "firm_id": np.repeat(firm_ids, T),
        "year": np.tile(years, cfg.n_firms),
        "leverage_lag": lev.ravel(),
        "market": np.tile(market, cfg.n_firms),
        "return": ret.ravel(),
        "size": size.ravel(),
        "mtb": mtb.ravel(),
    })


# ---------------------------------------------------------------------------
# Cleaning
# ---------------------------------------------------------------------------

def winsorize_by_group(values, groups=None, p_lo: float = 0.01, p_hi: float = 0.99) -> np.ndarray:
    """Clamp values to nearest-rank percentile bounds computed within each group.

    NaNs pass through and do not count towards ``n``.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot winsorize an empty array")
    if not 0 <= p_lo <= p_hi <= 1:
        raise ValueError("need 0 <= p_lo <= p_hi <= 1")
    g = np.zeros(v.size, dtype=int) if groups is None else pd.factorize(np.asarray(groups))[0]
    out = v.copy()
    for code in np.unique(g):
        idx = np.flatnonzero((g == code) & ~np.isnan(v))
        if idx.size == 0:
            continue
        s = np.sort(v[idx])
        lo = s[nearest_rank(p_lo, s.size) - 1]
        hi = s[nearest_rank(p_hi, s.size) - 1]
        out[idx] = np.clip(v[idx], lo, hi)
    return out


def trim_above(values, p: float = 0.95, groups=None) -> tuple[np.ndarray, np.ndarray]:
    """Drop values strictly above the nearest-rank ``p`` percentile.

    Returns ``(kept_values, kept_mask)``.  NaNs are kept in the mask.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot trim an empty array")
    g = np.zeros(v.size, dtype=int) if groups is None else pd.factorize(np.asarray(groups))[0]
    mask = np.ones(v.size, dtype=bool)
    for code in np.unique(g):
        idx = np.flatnonzero((g == code) & ~np.isnan(v))
        if idx.size == 0:
            continue
        s = np.sort(v[idx])
        bound = s[nearest_rank(p, s.size) - 1]
        mask[idx] = v[idx] <= bound
    return v[mask], mask


def balance_check(rows: pd.DataFrame, threshold: float = 0.20) -> pd.DataFrame:
    """Flag balance sheets whose three totals disagree by more than ``threshold``.

    Each pairwise gap is measured relative to the larger of the two totals.
    Rows whose three totals are all zero are flagged as degenerate.
    """
    cols = ["sum_assets", "sum_liabilities_equity", "reported_total"]
    missing = [c for c in cols if c not in rows.columns]
    if missing:
        raise ValueError(f"missing columns: {', '.join(missing)}")
    vals = rows[cols].to_numpy(dtype=float)
    if np.any(vals < 0):
        raise ValueError("balance sheet totals must be nonnegative")
    worst = np.zeros(len(rows))
    for a, b in ((0, 1), (0, 2), (1, 2)):
        top = np.maximum(vals[:, a], vals[:, b])
        gap = np.abs(vals[:, a] - vals[:, b])
        rel = np.divide(gap, top, out=np.zeros_like(gap), where=top > 0)
        worst = np.maximum(worst, rel)
    degenerate = np.all(vals == 0, axis=1)
    out = rows[[c for c in ("firm_id", "year") if c in rows.columns]].copy()
    out["max_rel_diff"] = worst
    out["degenerate"] = degenerate
    out["flagged"] = (worst > threshold) | degenerate
    return out


# ---------------------------------------------------------------------------
# IO
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def save_panel(table: pd.DataFrame, path: str | Path) -> None:
    """Write the panel CSV: schema columns first, then any extra columns."""
    missing = [c for c in REQUIRED_COLUMNS if c not in table.columns]
    if missing:
        raise PanelFormatError(f"table lacks required columns: {', '.join(missing)}")
    cols = [c for c in PANEL_COLUMNS] + [c for c in table.columns if c not in PANEL_COLUMNS]
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        present = [c in table.columns for c in cols]
        data = [table[c].tolist() if ok else None for c, ok in zip(cols, present)]
        for r in range(len(table)):
            fh.write(",".join(_fmt(d[r]) if d is not None else "" for d in data) + "\n")
    tmp.replace(path)


def _parse_float(text: str) -> float:
    try:
        return float(text) if text else math.nan
    except ValueError:
        return math.nan


def load_panel(path: str | Path) -> pd.DataFrame:
    """Read and validate a panel CSV.

    Required columns must be present and filled; optional schema columns may
    be absent or empty.  Errors name the offending CSV line.
    """
    path = Path(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise PanelFormatError(f"{path}: file is empty") from None
    except pd.errors.ParserError as exc:
        raise PanelFormatError(f"{path}: malformed CSV: {exc}") from None
    missing = [c for c in REQUIRED_COLUMNS if c not in raw.columns]
    if missing:
        raise PanelFormatError(f"{path}: missing required columns: {', '.join(missing)}")
    out = {}
    for col in raw.columns:
        s = raw[col].str.strip()
        if col in REQUIRED_COLUMNS:
            empty = s == ""
            if empty.any():
                line = int(np.flatnonzero(empty.to_numpy())[0]) + 2
                raise PanelFormatError(f"{path}:{line}: required column {col!r} is empty")
        # python float parsing is exact; pandas' fast parser is not
        num = pd.Series([_parse_float(v) for v in s], index=s.index, dtype=float)
        bad = num.isna() & (s != "") & (s.str.lower() != "nan")
        if bad.any():
            line = int(np.flatnonzero(bad.to_numpy())[0]) + 2
            raise PanelFormatError(f"{path}:{line}: column {col!r} is not numeric: "
                                   f"{s.iloc[line - 2]!r}")
        if col in ("firm_id", "industry_id", "year"):
            if not np.all(num == np.round(num)):
                line = int(np.flatnonzero((num != np.round(num)).to_numpy())[0]) + 2
                raise PanelFormatError(f"{path}:{line}: column {col!r} must be integer")
            num = num.astype(np.int64)
        out[col] = num
    table = pd.DataFrame(out)
    dup = table.duplicated(["firm_id", "year"], keep="first")
    if dup.any():
        line = int(np.flatnonzero(dup.to_numpy())[0]) + 2
        row = table.iloc[line - 2]
        raise PanelFormatError(f"{path}:{line}: duplicate (firm_id, year) = "
                               f"({row.firm_id}, {row.year})")
    lev = table["leverage_1917"]
    if ((lev < 0) | (lev > 1)).any():
        line = int(np.flatnonzero(((lev < 0) | (lev > 1)).to_numpy())[0]) + 2
        raise PanelFormatError(f"{path}:{line}: leverage_1917 outside [0, 1]")
    if (table.groupby("firm_id")["leverage_1917"].nunique() > 1).any():
        raise PanelFormatError(f"{path}: leverage_1917 varies within a firm")
    for col in _SHARE_COLUMNS:
        if col in table:
            s = table[col]
            bad = (s < 0) | (s > 1)
            if bad.any():
                line = int(np.flatnonzero(bad.to_numpy())[0]) + 2
                raise PanelFormatError(f"{path}:{line}: {col} outside [0, 1]")
    for col in PANEL_COLUMNS:
        if col not in table:
            table[col] = np.nan
    extras = [c for c in table.columns if c not in PANEL_COLUMNS]
    return table[PANEL_COLUMNS + extras]


def load_config(cls, path: str | Path, **overrides):
    """Build ``PanelConfig`` or ``ReturnsConfig`` from a flat ``key = value`` file."""
    types = {f.name: f.type for f in fields(cls)}
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = int(val) if types[key] in ("int", int) else float(val)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {val!r}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return cls(**values)


def config_dict(config) -> dict:
    return asdict(config)
