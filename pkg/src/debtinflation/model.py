"""Static debt-inflation economy: nominal firm debt, default, and a working-capital constraint.

A unit mass of entrepreneurs holds capital ``K0`` and owes nominal debt ``D0``
to households.  Each firm draws a real capital shock ``Z ~ G``; firms whose
real net worth ``K0 - D0/P - Z`` is negative default.  Surviving firms borrow
intra-period against a share ``xi`` of output and hire labor from
monopolistically competitive workers.  Households hold the firms' debt, so a
higher price level ``P`` both relaxes firm financing constraints and erodes
household wealth.

All functions here are pure; they take a :class:`ModelParams` and return new
values.  Only the constrained branch of the firm problem is solved.  Solvers
check the sign of the constraint multiplier and raise
:class:`UnconstrainedFirmError` instead of switching branch.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from scipy import integrate, stats

__all__ = [
    "ModelDomainError",
    "NoEquilibriumError",
    "UnconstrainedFirmError",
    "ShockDistribution",
    "ModelParams",
    "FirmAllocation",
    "EquilibriumPoint",
    "default_cutoff",
    "default_share",
    "capital_labor_ratio",
    "demand_denominator",
    "firm_labor_demand",
    "aggregate_labor_demand",
    "household_debt_wealth",
    "labor_supply_wage",
    "worker_utility",
    "constraint_multiplier",
    "firm_value",
    "firm_allocations",
    "flexible_equilibrium",
    "rigid_allocation",
    "menu_cost_equilibrium",
    "sweep",
    "comparative_statics_D0",
    "DebtComparativeStatics",
    "default_curve",
    "count_regime_switches",
    "SWEEP_COLUMNS",
]

SOLVER_DELTA = 1e-9
SOLVER_MAX_ITER = 200
QUAD_EPSABS = 1e-10
MULTIPLIER_TOL = 1e-12

SWEEP_COLUMNS = [
    "P", "W", "w", "L", "Y", "Zstar", "default_share", "regime",
    "utility_adjust", "utility_stay", "resource_residual",
]


class ModelDomainError(ValueError):
    """An input lies outside the region where a model formula is defined."""


class NoEquilibriumError(RuntimeError):
    """Labor demand and supply do not cross inside the validity region."""


class UnconstrainedFirmError(RuntimeError):
    """The working-capital constraint would not bind for some active firm."""


# ---------------------------------------------------------------------------
# Primitives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShockDistribution:
    """Distribution ``G`` of the idiosyncratic capital shock ``Z``.

    ``family`` is ``"uniform"`` on ``[z_lo, z_hi]`` or ``"truncnorm"``, a
    normal with location ``mu`` and scale ``sigma`` truncated to the same
    support.
    """

    family: str = "uniform"
    z_lo: float = 0.0
    z_hi: float = 1.0
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.family not in ("uniform", "truncnorm"):
            raise ValueError(f"unknown shock family {self.family!r}")
        if not (math.isfinite(self.z_lo) and math.isfinite(self.z_hi)):
            raise ValueError("shock support bounds must be finite")
        if not self.z_lo < self.z_hi:
            raise ValueError(f"need z_lo < z_hi, got [{self.z_lo}, {self.z_hi}]")
        if self.family == "truncnorm" and not self.sigma > 0:
            raise ValueError("truncated normal needs sigma > 0")

    @cached_property
    def _truncnorm(self):
        a = (self.z_lo - self.mu) / self.sigma
        b = (self.z_hi - self.mu) / self.sigma
        return stats.truncnorm(a, b, loc=self.mu, scale=self.sigma)

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.family == "uniform":
            out = np.clip((z - self.z_lo) / (self.z_hi - self.z_lo), 0.0, 1.0)
        else:
            out = np.clip(self._truncnorm.cdf(z), 0.0, 1.0)
        return out[()] if out.ndim == 0 else out

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.z_lo) & (z <= self.z_hi)
        if self.family == "uniform":
            out = np.where(inside, 1.0 / (self.z_hi - self.z_lo), 0.0)
        else:
            out = np.where(inside, self._truncnorm.pdf(z), 0.0)
        return out[()] if out.ndim == 0 else out

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q <= 0) | (q >= 1)):
            raise ValueError("quantile levels must lie in (0, 1)")
        if self.family == "uniform":
            out = self.z_lo + q * (self.z_hi - self.z_lo)
        else:
            out = self._truncnorm.ppf(q)
        return out[()] if out.ndim == 0 else out

    def partial_mean(self, upper: float) -> float:
        """Return the integral of ``z dG(z)`` from ``z_lo`` to ``upper``."""
        u = min(max(float(upper), self.z_lo), self.z_hi)
        if u <= self.z_lo:
            return 0.0
        if self.family == "uniform":
            return (u * u - self.z_lo * self.z_lo) / (2.0 * (self.z_hi - self.z_lo))
        val, _ = integrate.quad(lambda z: z * self._truncnorm.pdf(z), self.z_lo, u,
                                epsabs=QUAD_EPSABS, epsrel=1e-12, limit=200)
        return float(val)

    def clamp(self, z: float) -> float:
        return min(max(float(z), self.z_lo), self.z_hi)


@dataclass(frozen=True)
class ModelParams:
    """Primitives of the economy.

    Attributes:
        alpha: capital share in production, in (0, 1).
        A: total factor productivity.
        xi: share of output pledgeable for intra-period borrowing, in (0, 1).
        epsilon: elasticity of substitution across labor varieties, > 1.
        chi: weight on labor disutility.
        varphi: inverse Frisch elasticity parameter.
        psi: utility cost of changing the nominal wage from ``W0``.
        K0: initial capital per entrepreneur.
        D0: initial nominal debt per entrepreneur.
        W0: preset nominal wage.
        G: distribution of the capital shock.
    """

    alpha: float
    A: float
    xi: float
    epsilon: float
    chi: float
    varphi: float
    psi: float
    K0: float
    D0: float
    W0: float
    G: ShockDistribution = field(default_factory=ShockDistribution)

    def __post_init__(self):
        problems = []
        if not 0 < self.alpha < 1:
            problems.append("alpha must lie in (0, 1)")
        if not self.A > 0:
            problems.append("A must be positive")
        if not 0 < self.xi < 1:
            problems.append("xi must lie in (0, 1)")
        if not self.epsilon > 1:
            problems.append("epsilon must exceed 1")
        if not self.chi > 0:
            problems.append("chi must be positive")
        if not self.varphi >= 0:
            problems.append("varphi must be nonnegative")
        if not self.psi >= 0:
            problems.append("psi must be nonnegative")
        if not self.K0 > 0:
            problems.append("K0 must be positive")
        if not self.D0 >= 0:
            problems.append("D0 must be nonnegative")
        if not (self.W0 > 0 and math.isfinite(self.W0)):
            problems.append("W0 must be strictly positive")
        if not isinstance(self.G, ShockDistribution):
            problems.append("G must be a ShockDistribution")
        if problems:
            raise ValueError("invalid model parameters: " + "; ".join(problems))

    @property
    def markup(self) -> float:
        return self.epsilon / (self.epsilon - 1.0)

    @property
    def L_max(self) -> float:
        """Labor level at which the household supply curve diverges."""
        return (1.0 / (self.markup * self.chi)) ** (1.0 / (1.0 + self.varphi))

    @property
    def w_floor(self) -> float:
        """Real wage below which the labor-demand denominator is nonpositive."""
        a = self.alpha
        base = self.xi * self.A * (1 - a) ** (1 - a) * a ** a
        return base ** (1.0 / (1.0 - a))

    @property
    def w_constrained_max(self) -> float:
        """Largest real wage at which the constraint multiplier is nonnegative."""
        a = self.alpha
        return (1 - a) / a * (self.A * a) ** (1.0 / (1.0 - a))

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def _check_price(P: float) -> float:
    P = float(P)
    if not (P > 0 and math.isfinite(P)):
        raise ModelDomainError(f"price level must be positive and finite, got {P}")
    return P


def _check_wage(w: float) -> float:
    w = float(w)
    if not (w > 0 and math.isfinite(w)):
        raise ModelDomainError(f"real wage must be positive and finite, got {w}")
    return w


def default_cutoff(P: float, params: ModelParams, clamp: bool = False) -> float:
    """Shock level above which a firm defaults, ``K0 - D0/P``.

    With ``clamp=True`` the value is clamped to the support of ``G`` as used
    for CDF evaluation.
    """
    P = _check_price(P)
    z = params.K0 - params.D0 / P
    return params.G.clamp(z) if clamp else z


def default_share(P: float, params: ModelParams) -> float:
    """Share of entrepreneurs that default at price level ``P``."""
    return float(1.0 - params.G.cdf(default_cutoff(P, params, clamp=True)))


def capital_labor_ratio(w: float, params: ModelParams) -> float:
    w = _check_wage(w)
    return params.alpha / (1.0 - params.alpha) * w


def demand_denominator(w: float, params: ModelParams) -> float:
    """Labor cost net of pledgeable output per unit of labor, at the optimal K/L ratio."""
    w = _check_wage(w)
    a = params.alpha
    return w / (1.0 - a) - params.xi * params.A * (a / (1.0 - a) * w) ** a


def _valid_denominator(w: float, params: ModelParams) -> float:
    den = demand_denominator(w, params)
    if not den > 0:
        raise ModelDomainError(
            f"real wage w={w:.6g} is outside the labor-demand validity region "
            f"w > {params.w_floor:.6g} (where w/(1-alpha) exceeds xi*A*k^alpha)")
    return den


def firm_labor_demand(Z, w: float, P: float, params: ModelParams):
    """Labor hired by a constrained firm with shock ``Z`` (zero for defaulters)."""
    P = _check_price(P)
    den = _valid_denominator(w, params)
    Z = np.asarray(Z, dtype=float)
    net = params.K0 - params.D0 / P - Z
    out = np.where(net >= 0, net / den, 0.0)
    return out[()] if out.ndim == 0 else out


def aggregate_labor_demand(w: float, P: float, params: ModelParams) -> float:
    P = _check_price(P)
    den = _valid_denominator(w, params)
    zc = default_cutoff(P, params, clamp=True)
    mass = float(params.G.cdf(zc))
    numerator = mass * (params.K0 - params.D0 / P) - params.G.partial_mean(zc)
    return max(numerator, 0.0) / den


def household_debt_wealth(P: float, params: ModelParams) -> float:
    """Real value of the debt claims households hold on surviving firms."""
    P = _check_price(P)
    return float(params.G.cdf(default_cutoff(P, params, clamp=True))) * params.D0 / P


def labor_supply_wage(L: float, P: float, params: ModelParams) -> float:
    """Real wage at which households supply ``L`` units of labor."""
    P = _check_price(P)
    L = float(L)
    if params.D0 == 0:
        raise ModelDomainError("with D0 = 0 labor supply is inelastic at L_max; "
                               "no wage schedule exists")
    if L < 0:
        raise ModelDomainError(f"labor must be nonnegative, got {L}")
    if L >= params.L_max:
        raise ModelDomainError(f"labor L={L:.6g} at or beyond supply singularity "
                               f"L_max={params.L_max:.6g}")
    mc = params.markup * params.chi
    return (mc * L ** params.varphi / (1.0 - mc * L ** (1.0 + params.varphi))
            * household_debt_wealth(P, params))


def worker_utility(w: float, L: float, P: float, params: ModelParams) -> float:
    C = w * L + household_debt_wealth(P, params)
    if not C > 0:
        raise ModelDomainError(f"household consumption must be positive, got {C}")
    return math.log(C) - params.chi * L ** (1.0 + params.varphi) / (1.0 + params.varphi)


def constraint_multiplier(w: float, params: ModelParams) -> float:
    """Multiplier on the working-capital constraint implied by the capital FOC."""
    k = capital_labor_ratio(w, params)
    FK = params.A * params.alpha * k ** (params.alpha - 1.0)
    return (FK - 1.0) / (1.0 - params.xi * FK)


def firm_value(Z, w: float, P: float, params: ModelParams, form: str = "allocation"):
    """Entrepreneur value ``(1 - xi) * A * K^alpha * L^(1 - alpha)``; zero after default.

    ``form="closed"`` uses ``(1 - xi) * A * k^alpha * L`` with ``k`` the
    capital-labor ratio; both agree algebraically.
    """
    L = np.asarray(firm_labor_demand(Z, w, P, params), dtype=float)
    k = capital_labor_ratio(w, params)
    a = params.alpha
    if form == "allocation":
        K = k * L
        out = (1.0 - params.xi) * params.A * K ** a * L ** (1.0 - a)
    elif form == "closed":
        out = (1.0 - params.xi) * params.A * k ** a * L
    else:
        raise ValueError(f"unknown form {form!r}")
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class FirmAllocation:
    """Per-firm choices at a given real wage and price level (arrays over ``Z``)."""

    Z: np.ndarray
    active: np.ndarray
    K: np.ndarray
    L: np.ndarray
    J: np.ndarray
    D: np.ndarray


def firm_allocations(Z, w: float, P: float, params: ModelParams) -> FirmAllocation:
    Z = np.atleast_1d(np.asarray(Z, dtype=float))
    zstar = default_cutoff(P, params)
    L = np.atleast_1d(firm_labor_demand(Z, w, P, params))
    K = capital_labor_ratio(w, params) * L
    a = params.alpha
    Y = params.A * K ** a * L ** (1.0 - a)
    return FirmAllocation(Z=Z, active=Z <= zstar, K=K, L=L,
                          J=(1.0 - params.xi) * Y, D=params.xi * P * Y)


# ---------------------------------------------------------------------------
# Equilibrium
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquilibriumPoint:
    """One solved economy at price level ``P``."""

    P: float
    W: float
    w: float
    L: float
    Y: float
    K: float
    Zstar: float
    default_share: float
    regime: str
    utility_adjust: float
    utility_stay: float
    lambda_ok: bool
    multiplier: float
    residual_demand_supply: float
    resource_residual: float
    household_consumption: float
    params: ModelParams = field(repr=False, compare=False)

    def firms(self, Z) -> FirmAllocation:
        return firm_allocations(Z, self.w, self.P, self.params)

    def as_row(self) -> dict:
        return {name: getattr(self, name) for name in SWEEP_COLUMNS}


def _assemble(P: float, w: float, L: float, params: ModelParams, regime: str,
              residual: float, utility_adjust=math.nan, utility_stay=math.nan
              ) -> EquilibriumPoint:
    a = params.alpha
    zstar = default_cutoff(P, params)
    mass = float(params.G.cdf(params.G.clamp(zstar)))
    k = capital_labor_ratio(w, params)
    K = k * L
    Y = params.A * k ** a * L
    C = w * L + household_debt_wealth(P, params)
    lam = constraint_multiplier(w, params)
    # Entrepreneurs consume J = (1 - xi) Y; investment is K - K0 over survivors.
    resource = Y - ((1.0 - params.xi) * Y + K - mass * params.K0 + C)
    return EquilibriumPoint(
        P=P, W=w * P, w=w, L=L, Y=Y, K=K, Zstar=zstar,
        default_share=1.0 - mass, regime=regime,
        utility_adjust=utility_adjust, utility_stay=utility_stay,
        lambda_ok=bool(mass == 0 or lam >= -MULTIPLIER_TOL), multiplier=lam,
        residual_demand_supply=residual, resource_residual=resource,
        household_consumption=C, params=params)


def _bisect(f, lo: float, hi: float) -> float:
    """Sign-based bisection with ``f(lo) > 0 > f(hi)``; runs to float resolution."""
    for _ in range(SOLVER_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _excess_demand(L: float, P: float, params: ModelParams) -> float:
    w = labor_supply_wage(L, P, params)
    if w <= 0 or demand_denominator(w, params) <= 0:
        return math.inf
    return aggregate_labor_demand(w, P, params) - L


def _inelastic_equilibrium(P: float, params: ModelParams) -> tuple[float, float]:
    # D0 = 0: supply sits at L_max; find the real wage that clears demand there.
    L = params.L_max
    lo = params.w_floor * (1.0 + 1e-12)
    if aggregate_labor_demand(lo, P, params) <= L:
        raise NoEquilibriumError("no equilibrium in validity region: demand at the "
                                 "wage floor is below inelastic supply")
    hi = max(2.0 * lo, 1.0)
    while aggregate_labor_demand(hi, P, params) > L:
        hi *= 2.0
        if hi > 1e12:
            raise NoEquilibriumError("no equilibrium in validity region")
    w = _bisect(lambda x: aggregate_labor_demand(x, P, params) - L, lo, hi)
    return w, abs(aggregate_labor_demand(w, P, params) - L)


def flexible_equilibrium(P: float, params: ModelParams) -> EquilibriumPoint:
    """Solve the flexible-wage labor market at price level ``P``.

    Bisects on aggregate labor ``L`` in ``(delta, L_max - delta)``, mapping
    each ``L`` to the household supply wage and comparing with aggregate
    demand at that wage.
    """
    P = _check_price(P)
    if params.D0 == 0:
        w, resid = _inelastic_equilibrium(P, params)
        L = params.L_max
    else:
        lo, hi = SOLVER_DELTA, params.L_max - SOLVER_DELTA
        f = lambda L: _excess_demand(L, P, params)  # noqa: E731
        if not (f(lo) > 0 and f(hi) < 0):
            raise NoEquilibriumError(
                f"no equilibrium in validity region at P={P:.6g}: excess demand "
                f"does not change sign on (0, L_max)")
        L = _bisect(f, lo, hi)
        w = labor_supply_wage(L, P, params)
        resid = abs(aggregate_labor_demand(w, P, params) - L)
    point = _assemble(P, w, L, params, "adjusted", resid)
    if not point.lambda_ok:
        raise UnconstrainedFirmError(
            f"unconstrained firm encountered at P={P:.6g}: multiplier "
            f"{point.multiplier:.6g} < 0 at w={w:.6g} (need w <= "
            f"{params.w_constrained_max:.6g})")
    u = worker_utility(w, L, P, params)
    return replace(point, utility_adjust=u - params.psi)


def rigid_allocation(P: float, W0: float, params: ModelParams) -> EquilibriumPoint:
    """Allocation with the nominal wage held at ``W0``; labor is read off demand."""
    P = _check_price(P)
    if not W0 > 0:
        raise ModelDomainError("W0 must be positive")
    w = W0 / P
    L = aggregate_labor_demand(w, P, params)
    u = worker_utility(w, L, P, params)
    return _assemble(P, w, L, params, "rigid", math.nan, utility_stay=u)


def menu_cost_equilibrium(P: float, params: ModelParams) -> EquilibriumPoint:
    """Choose between adjusting the wage (paying ``psi``) and keeping ``W0``.

    Workers adjust only if adjusted utility net of ``psi`` strictly exceeds
    utility at ``W0``.  When ``W0/P`` leaves the labor-demand validity region
    the rigid allocation does not exist and the wage is adjusted.
    """
    flex = flexible_equilibrium(P, params)
    try:
        rigid = rigid_allocation(P, params.W0, params)
        u_stay = rigid.utility_stay
    except ModelDomainError:
        rigid, u_stay = None, -math.inf
    u_adj = flex.utility_adjust
    if rigid is not None and not u_adj > u_stay:
        return replace(rigid, utility_adjust=u_adj)
    return replace(flex, utility_stay=u_stay)


# ---------------------------------------------------------------------------
# Sweeps and comparative statics
# ---------------------------------------------------------------------------

_SOLVERS = {
    "menu_cost": menu_cost_equilibrium,
    "flexible": flexible_equilibrium,
    "rigid": lambda P, params: rigid_allocation(P, params.W0, params),
}


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("DEBTINFLATION_THREADS", "1")))
    except ValueError:
        return 1


def _check_grid(P_grid) -> np.ndarray:
    grid = np.asarray(P_grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("price grid is empty")
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise ValueError("price grid must be positive and finite")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("price grid must be strictly increasing")
    return grid


def sweep(P_grid: Iterable[float], params: ModelParams, kind: str = "menu_cost",
          threads: int | None = None) -> pd.DataFrame:
    """Solve the economy at every grid price level.

    Rows that fail carry NaNs, ``regime="error"`` and the message in
    ``error``; the sweep continues.  Output order follows the grid regardless
    of ``threads``.
    """
    grid = _check_grid(P_grid)
    solver = _SOLVERS[kind]

    def solve_row(P):
        try:
            pt = solver(float(P), params)
        except (ModelDomainError, NoEquilibriumError, UnconstrainedFirmError) as exc:
            row = {c: math.nan for c in SWEEP_COLUMNS}
            row.update(P=float(P), regime="error", lambda_ok=False, error=str(exc))
            return row
        row = pt.as_row()
        row.update(lambda_ok=pt.lambda_ok, error="")
        return row

    n = threads if threads is not None else _thread_count()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(solve_row, grid))
    else:
        rows = [solve_row(P) for P in grid]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS + ["lambda_ok", "error"])


@dataclass
class DebtComparativeStatics:
    """Labor demand at a fixed real wage across price levels and debt levels.

    ``table`` has one row per ``(P, D0)``.  ``margins`` compares consecutive
    debt levels: ``margin`` is the high-debt demand increment minus the
    low-debt increment over ``[P, P + h]``.
    """

    table: pd.DataFrame
    margins: pd.DataFrame
    w: float

    def holds(self, tol: float = 1e-9) -> bool:
        return bool(len(self.margins)) and bool((self.margins["margin"] > -tol).all())


def comparative_statics_D0(P_grid: Sequence[float], D0_list: Sequence[float],
                           params: ModelParams, w: float | None = None,
                           h_rel: float = 1e-4) -> DebtComparativeStatics:
    """Response of labor demand to ``P`` for several initial debt levels.

    ``w`` defaults to the flexible real wage at ``P = 1`` under ``params``.
    Rows preserve the order of ``D0_list``; equilibrium failures are recorded
    in ``error``.
    """
    grid = _check_grid(P_grid)
    D0s = [float(d) for d in D0_list]
    if any(d < 0 for d in D0s):
        raise ValueError("initial debt levels must be nonnegative")
    if w is None:
        w = flexible_equilibrium(1.0, params).w
    rows = []
    for P in grid:
        h = h_rel * P
        for D0 in D0s:
            p = params.replace(D0=D0)
            ld = aggregate_labor_demand(w, P, p)
            inc = aggregate_labor_demand(w, P + h, p) - ld
            try:
                L_eq, err = flexible_equilibrium(P, p).L, ""
            except (ModelDomainError, NoEquilibriumError, UnconstrainedFirmError) as exc:
                L_eq, err = math.nan, str(exc)
            rows.append({"P": P, "D0": D0, "labor_demand": ld, "demand_increment": inc,
                         "h": h, "L_eq": L_eq, "error": err})
    table = pd.DataFrame(rows)
    order = sorted(set(D0s))
    margins = []
    for P, grp in table.groupby("P", sort=True):
        inc = dict(zip(grp["D0"], grp["demand_increment"]))
        for lo, hi in zip(order, order[1:]):
            margins.append({"P": P, "D0_lo": lo, "D0_hi": hi,
                            "margin": inc[hi] - inc[lo]})
    return DebtComparativeStatics(table=table, margins=pd.DataFrame(margins), w=float(w))


def default_curve(P_grid: Sequence[float], params: ModelParams,
                  firm_mass: float = 1.0) -> pd.DataFrame:
    """Model analogue of bankruptcies against inflation.

    Inflation is measured from ``P = 1`` as ``100 * ln P``.
    """
    grid = _check_grid(P_grid)
    counts = np.array([default_share(P, params) for P in grid]) * firm_mass
    return pd.DataFrame({"P": grid, "log_inflation": 100.0 * np.log(grid),
                         "default_count": counts})


def count_regime_switches(regimes: Sequence[str]) -> int:
    r = list(regimes)
    return sum(a != b for a, b in zip(r, r[1:]))
