"""Least-squares machinery: fixed-effect absorption, cluster-robust covariance, OLS and 2SLS."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats

__all__ = [
    "RankDeficiencyError",
    "EstimationError",
    "RegressionResult",
    "group_codes",
    "absorb",
    "cluster_covariance",
    "ols",
    "within_fe_ols",
    "tsls",
    "DUMMY_ROW_LIMIT",
    "AP_TOL",
]

DUMMY_ROW_LIMIT = 5000
AP_TOL = 1e-12
AP_MAX_ITER = 10_000
RANK_TOL = 1e-10


class EstimationError(ValueError):
    """The requested model cannot be estimated on the given data."""


class RankDeficiencyError(EstimationError):
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        super().__init__("design matrix is rank deficient after absorbing fixed effects; "
                         "collinear columns: " + ", ".join(self.columns))


@dataclass
class RegressionResult:
    """Coefficients with a robust covariance matrix.

    ``df_resid`` is the degrees of freedom used for t and F reference
    distributions: ``n_clusters - 1`` for clustered covariance, ``n_obs - k``
    for HC1.
    """

    names: list[str]
    params: np.ndarray
    cov: np.ndarray
    n_obs: int
    n_clusters: int
    df_resid: int
    r2_within: float
    resid: np.ndarray
    cov_type: str = "cluster"
    first_stage_f: float | None = None
    first_stage: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))

    @property
    def tstats(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.params / self.se

    @property
    def pvalues(self) -> np.ndarray:
        return 2.0 * stats.t.sf(np.abs(self.tstats), self.df_resid)

    def _index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no coefficient named {name!r}") from None

    def coef(self, name: str) -> float:
        return float(self.params[self._index(name)])

    def stderr(self, name: str) -> float:
        return float(self.se[self._index(name)])

    def conf_int(self, level: float = 0.95) -> np.ndarray:
        crit = stats.t.ppf(0.5 + level / 2.0, self.df_resid)
        return np.column_stack([self.params - crit * self.se, self.params + crit * self.se])

    @property
    def weak_instruments(self) -> bool:
        return self.first_stage_f is not None and self.first_stage_f < 10.0

    def wald_test(self, terms: Sequence[str]) -> tuple[float, float]:
        """Joint test that the named coefficients are zero: ``(F, p-value)``."""
        idx = [self._index(t) for t in terms]
        b = self.params[idx]
        V = self.cov[np.ix_(idx, idx)]
        q = len(idx)
        F = float(b @ np.linalg.solve(V, b)) / q
        return F, float(stats.f.sf(F, q, self.df_resid))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"term": self.names, "estimate": self.params, "se": self.se,
                             "t": self.tstats, "p": self.pvalues})

    def to_csv(self, path: str | Path) -> None:
        frame = self.to_frame()
        with open(path, "w", newline="") as fh:
            fh.write("term,estimate,se,t,p\n")
            for row in frame.itertuples(index=False):
                fh.write(",".join([row.term] + [f"{v:.17g}" for v in row[1:]]) + "\n")

    def report(self) -> str:
        """Nested plain-text report in JSON layout."""
        body = {
            "coefficients": {n: {"estimate": float(b), "se": float(s)}
                             for n, b, s in zip(self.names, self.params, self.se)},
            "n_obs": self.n_obs,
            "n_clusters": self.n_clusters,
            "cov_type": self.cov_type,
            "r2_within": self.r2_within,
        }
        if self.first_stage_f is not None:
            body["first_stage_f"] = self.first_stage_f
            body["weak_instruments"] = self.weak_instruments
        if self.diagnostics:
            body["diagnostics"] = self.diagnostics
        return json.dumps(body, indent=2, sort_keys=True, default=_json_default)

    def summary(self) -> str:
        lines = [f"{'term':<28}{'estimate':>14}{'se':>12}{'t':>9}{'p':>9}"]
        for r in self.to_frame().itertuples(index=False):
            lines.append(f"{r.term:<28}{r.estimate:>14.5g}{r.se:>12.5g}{r.t:>9.3f}{r.p:>9.4f}")
        lines.append(f"N = {self.n_obs}, clusters = {self.n_clusters}, "
                     f"within R2 = {self.r2_within:.4f}")
        if self.first_stage_f is not None:
            lines.append(f"first-stage F = {self.first_stage_f:.3f}")
        return "\n".join(lines)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


# ---------------------------------------------------------------------------
# Fixed effects
# ---------------------------------------------------------------------------

def group_codes(*keys) -> np.ndarray:
    """Dense integer codes for the combination of one or more key arrays."""
    if len(keys) == 1:
        return pd.factorize(np.asarray(keys[0]), sort=True)[0]
    frame = pd.DataFrame({i: np.asarray(k) for i, k in enumerate(keys)})
    return frame.groupby(list(frame.columns), sort=True).ngroup().to_numpy()


def _demean(M: np.ndarray, codes: np.ndarray, counts: np.ndarray) -> np.ndarray:
    sums = np.zeros((counts.size, M.shape[1]))
    np.add.at(sums, codes, M)
    return M - (sums / counts[:, None])[codes]


def absorb(M, effects: Sequence[np.ndarray], method: str = "auto") -> np.ndarray:
    """Residualize the columns of ``M`` on sets of group dummies.

    ``method="dummies"`` demeans by the first effect and regresses out the
    remaining dummy sets explicitly (exact, by Frisch-Waugh).
    ``method="ap"`` runs alternating projections until the largest update
    falls below ``AP_TOL`` times the column scale.  ``"auto"`` uses dummies
    below ``DUMMY_ROW_LIMIT`` rows.
    """
    M = np.asarray(M, dtype=float)
    squeeze = M.ndim == 1
    if squeeze:
        M = M[:, None]
    codes = [np.asarray(c) for c in effects]
    if not codes:
        return M[:, 0] if squeeze else M
    codes = [pd.factorize(c, sort=True)[0] for c in codes]
    counts = [np.bincount(c) for c in codes]
    if method == "auto":
        method = "dummies" if M.shape[0] < DUMMY_ROW_LIMIT else "ap"
    out = _demean(M, codes[0], counts[0])
    if len(codes) > 1:
        if method == "dummies":
            D = np.hstack([np.eye(cnt.size)[c] for c, cnt in zip(codes[1:], counts[1:])])
            D = _demean(D, codes[0], counts[0])
            coef, *_ = np.linalg.lstsq(D, out, rcond=None)
            out = out - D @ coef
        elif method == "ap":
            scale = np.maximum(np.abs(M).max(axis=0), 1.0)
            for _ in range(AP_MAX_ITER):
                prev = out
                for c, cnt in zip(codes, counts):
                    out = _demean(out, c, cnt)
                if np.max(np.abs(out - prev) / scale) < AP_TOL:
                    break
            else:
                raise EstimationError("alternating projections did not converge")
        else:
            raise ValueError(f"unknown absorption method {method!r}")
    return out[:, 0] if squeeze else out


def _check_rank(X: np.ndarray, names: Sequence[str], reference: np.ndarray | None = None):
    """Raise :class:`RankDeficiencyError` naming columns spanned by earlier ones."""
    if X.shape[1] == 0:
        return
    ref = X if reference is None else reference
    scale = np.maximum(np.linalg.norm(ref, axis=0), 1e-300)
    Xs = X / scale
    if np.linalg.matrix_rank(Xs, tol=RANK_TOL * math.sqrt(X.shape[0])) == X.shape[1]:
        return
    bad, kept = [], []
    for j in range(X.shape[1]):
        col = Xs[:, j]
        if kept:
            B = Xs[:, kept]
            coef, *_ = np.linalg.lstsq(B, col, rcond=None)
            col = col - B @ coef
        if np.linalg.norm(col) <= RANK_TOL * math.sqrt(X.shape[0]):
            bad.append(names[j])
        else:
            kept.append(j)
    raise RankDeficiencyError(bad)


def cluster_covariance(X: np.ndarray, u: np.ndarray, clusters, k: int | None = None,
                       bread: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Cluster sandwich with the ``G/(G-1) * (N-1)/(N-K)`` small-sample factor.

    ``bread`` defaults to ``inv(X'X)``; ``k`` to the number of columns of ``X``.
    Returns the covariance and the number of clusters.
    """
    n, kx = X.shape
    k = kx if k is None else k
    codes = pd.factorize(np.asarray(clusters), sort=True)[0]
    G = int(codes.max()) + 1
    if G < 2:
        raise EstimationError("need at least two clusters")
    scores = np.zeros((G, kx))
    np.add.at(scores, codes, X * u[:, None])
    meat = scores.T @ scores
    if bread is None:
        bread = np.linalg.inv(X.T @ X)
    factor = G / (G - 1) * (n - 1) / (n - k)
    V = factor * bread @ meat @ bread
    return (V + V.T) / 2.0, G


def _hc1(X: np.ndarray, u: np.ndarray, bread: np.ndarray) -> np.ndarray:
    n, k = X.shape
    meat = (X * (u * u)[:, None]).T @ X
    V = n / (n - k) * bread @ meat @ bread
    return (V + V.T) / 2.0


def _prepare(y, X, names):
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.size:
        raise ValueError("y and X differ in length")
    names = list(names) if names is not None else [f"x{j}" for j in range(X.shape[1])]
    if len(names) != X.shape[1]:
        raise ValueError("one name per column of X is required")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
        raise EstimationError("y and X must be finite; drop missing rows first")
    return y, X, names


def ols(y, X, names=None, add_const: bool = True, cov_type: str = "HC1",
        clusters=None) -> RegressionResult:
    """Cross-sectional OLS with HC1 or cluster-robust covariance."""
    y, X, names = _prepare(y, X, names)
    if add_const:
        X = np.column_stack([np.ones(y.size), X])
        names = ["const"] + names
    n, k = X.shape
    if n <= k:
        raise EstimationError(f"need more observations ({n}) than regressors ({k})")
    _check_rank(X, names)
    XtX_inv = np.linalg.inv(X.T @ X)
    beta = XtX_inv @ (X.T @ y)
    u = y - X @ beta
    if cov_type == "HC1":
        V, G, df = _hc1(X, u, XtX_inv), n, n - k
    elif cov_type == "cluster":
        V, G = cluster_covariance(X, u, clusters, bread=XtX_inv)
        df = G - 1
    else:
        raise ValueError(f"unknown covariance type {cov_type!r}")
    yc = y - y.mean()
    r2 = 1.0 - float(u @ u) / float(yc @ yc) if yc @ yc > 0 else math.nan
    return RegressionResult(names=names, params=beta, cov=V, n_obs=n, n_clusters=G,
                            df_resid=df, r2_within=r2, resid=u, cov_type=cov_type)


def within_fe_ols(y, X, unit, time=None, clusters=None, names=None,
                  extra_effects: Sequence = (), method: str = "auto") -> RegressionResult:
    """OLS absorbing unit and time-group intercepts, with firm-clustered errors.

    ``time`` may be plain years or industry-by-year codes.  ``clusters``
    defaults to ``unit``.  The small-sample factor uses ``K`` equal to the
    number of explicit regressors.
    """
    y, X, names = _prepare(y, X, names)
    unit = np.asarray(unit)
    effects = [unit] + ([np.asarray(time)] if time is not None else []) + \
        [np.asarray(e) for e in extra_effects]
    clusters = unit if clusters is None else np.asarray(clusters)
    Z = absorb(np.column_stack([y, X]), effects, method=method)
    yt, Xt = Z[:, 0], Z[:, 1:]
    n, k = Xt.shape
    _check_rank(Xt, names, reference=X)
    XtX_inv = np.linalg.inv(Xt.T @ Xt)
    beta = XtX_inv @ (Xt.T @ yt)
    u = yt - Xt @ beta
    V, G = cluster_covariance(Xt, u, clusters, bread=XtX_inv)
    sst = float(yt @ yt)
    r2 = 1.0 - float(u @ u) / sst if sst > 0 else math.nan
    sizes = np.bincount(pd.factorize(clusters)[0])
    return RegressionResult(names=names, params=beta, cov=V, n_obs=n, n_clusters=G,
                            df_resid=G - 1, r2_within=r2, resid=u, cov_type="cluster",
                            diagnostics={"singleton_clusters": int((sizes == 1).sum())})


def tsls(y, endog, instruments, exog=None, unit=None, time=None, clusters=None,
         names=None, instrument_names=None, method: str = "auto") -> RegressionResult:
    """Two-stage least squares with optional absorbed unit/time effects.

    The covariance is the IV sandwich built from structural residuals and
    first-stage fitted regressors, clustered on ``clusters`` (default
    ``unit``; HC1 when neither is given).  The first-stage F for each
    endogenous regressor is a robust Wald test on the excluded instruments
    divided by their number; ``first_stage_f`` is the smallest of these.
    """
    y = np.asarray(y, dtype=float).ravel()
    Xe = np.asarray(endog, dtype=float).reshape(y.size, -1)
    Zx = np.asarray(instruments, dtype=float).reshape(y.size, -1)
    W = (np.empty((y.size, 0)) if exog is None
         else np.asarray(exog, dtype=float).reshape(y.size, -1))
    ke, kz, kw = Xe.shape[1], Zx.shape[1], W.shape[1]
    if kz < ke:
        raise EstimationError(f"underidentified: {kz} instruments for {ke} endogenous regressors")
    names = list(names) if names is not None else \
        [f"endog{j}" for j in range(ke)] + [f"exog{j}" for j in range(kw)]
    znames = list(instrument_names) if instrument_names is not None else \
        [f"z{j}" for j in range(kz)]
    if len(names) != ke + kw:
        raise ValueError("names must cover endogenous then exogenous columns")
    stacked = np.column_stack([y, Xe, Zx, W])
    if not np.all(np.isfinite(stacked)):
        raise EstimationError("inputs must be finite; drop missing rows first")
    effects = [np.asarray(e) for e in (unit, time) if e is not None]
    if effects:
        stacked = absorb(stacked, effects, method=method)
    else:
        W = np.column_stack([np.ones(y.size), W])
        names = names[:ke] + ["const"] + names[ke:]
        stacked = np.column_stack([y, Xe, Zx, W])
        kw += 1
    yt = stacked[:, 0]
    Xt = stacked[:, 1:1 + ke]
    Zt = stacked[:, 1 + ke:1 + ke + kz]
    Wt = stacked[:, 1 + ke + kz:]
    X = np.column_stack([Xt, Wt])
    Z = np.column_stack([Zt, Wt])
    n = y.size
    _check_rank(Z, znames + names[ke:])
    _check_rank(X, names)

    Z_pinv_fit = np.linalg.lstsq(Z, X, rcond=None)[0]
    Xhat = Z @ Z_pinv_fit
    _check_rank(Xhat, names)
    A_inv = np.linalg.inv(Xhat.T @ X)
    beta = A_inv @ (Xhat.T @ yt)
    u = yt - X @ beta
    bread = np.linalg.inv(Xhat.T @ Xhat)
    if clusters is None and unit is not None:
        clusters = unit
    if clusters is None:
        V = _hc1(Xhat, u, bread)
        G, df, cov_type = n, n - X.shape[1], "HC1"
    else:
        V, G = cluster_covariance(Xhat, u, clusters, k=X.shape[1], bread=bread)
        df, cov_type = G - 1, "cluster"

    first = {}
    for j in range(ke):
        g = Z_pinv_fit[:, j]
        r = Xt[:, j] - Z @ g
        ZtZ_inv = np.linalg.inv(Z.T @ Z)
        if clusters is None:
            Vg = _hc1(Z, r, ZtZ_inv)
        else:
            Vg, _ = cluster_covariance(Z, r, clusters, bread=ZtZ_inv)
        gz = g[:kz]
        F = float(gz @ np.linalg.solve(Vg[:kz, :kz], gz)) / kz
        first[names[j]] = F
    sst = float(yt @ yt) if effects else float(((yt - yt.mean()) ** 2).sum())
    r2 = 1.0 - float(u @ u) / sst if sst > 0 else math.nan
    return RegressionResult(names=names, params=beta, cov=V, n_obs=n, n_clusters=G,
                            df_resid=df, r2_within=r2, resid=u, cov_type=cov_type,
                            first_stage_f=min(first.values()) if first else None,
                            first_stage=first)
