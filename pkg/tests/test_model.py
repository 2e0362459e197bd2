import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from debtinflation.calibration import default_params
from debtinflation.model import (
    ModelDomainError,
    ModelParams,
    NoEquilibriumError,
    SWEEP_COLUMNS,
    ShockDistribution,
    UnconstrainedFirmError,
    aggregate_labor_demand,
    capital_labor_ratio,
    comparative_statics_D0,
    constraint_multiplier,
    count_regime_switches,
    default_curve,
    default_cutoff,
    default_share,
    demand_denominator,
    firm_allocations,
    firm_labor_demand,
    firm_value,
    flexible_equilibrium,
    labor_supply_wage,
    menu_cost_equilibrium,
    rigid_allocation,
    sweep,
    worker_utility,
)

from oracles import aggregate_demand_quad, equilibrium_by_grid, firm_labor_by_root


def make(**kw):
    base = dict(alpha=0.5, A=1.0, xi=0.5, epsilon=2.0, chi=1.0, varphi=1.0, psi=0.01,
                K0=2.0, D0=1.0, W0=1.0, G=ShockDistribution("uniform", 0.0, 2.0))
    base.update(kw)
    return ModelParams(**base)


@pytest.fixture(scope="module")
def params():
    return default_params()


# -- primitives --------------------------------------------------------------

def test_default_cutoff_examples():
    assert default_cutoff(1.0, make()) == 1.0
    assert default_cutoff(7.3, make(D0=0.0)) == 2.0
    assert default_cutoff(1e12, make()) == pytest.approx(2.0, abs=1e-11)


def test_default_cutoff_clamps_only_on_request():
    p = make(D0=5.0)
    assert default_cutoff(1.0, p) == -3.0
    assert default_cutoff(1.0, p, clamp=True) == 0.0
    assert default_share(1.0, p) == 1.0


def test_default_share_examples():
    assert default_share(1.0, make()) == pytest.approx(0.5, abs=1e-15)
    assert default_share(2.0, make()) == pytest.approx(0.25, abs=1e-15)


def test_default_share_slope_matches_density_formula():
    p, h = make(), 1e-5
    fd = (default_share(1 + h, p) - default_share(1 - h, p)) / (2 * h)
    assert fd == pytest.approx(-0.5, rel=1e-8)


def test_capital_labor_ratio_examples():
    assert capital_labor_ratio(1.0, make()) == 1.0
    assert capital_labor_ratio(2.0, make()) == 2.0
    assert capital_labor_ratio(1.0, make(alpha=1 / 3)) == pytest.approx(0.5, rel=1e-15)


def test_firm_labor_demand_worked_example():
    p = make()
    assert demand_denominator(1.0, p) == pytest.approx(1.5, rel=1e-15)
    assert firm_labor_demand(0.0, 1.0, 2.0, p) == pytest.approx(1.0, rel=1e-15)
    ref = firm_labor_by_root(0.0, 1.0, 2.0, dict(alpha=0.5, A=1.0, xi=0.5, K0=2.0, D0=1.0))
    assert ref == pytest.approx(1.0, rel=1e-12)


def test_firm_labor_demand_zero_at_cutoff_and_beyond():
    p = make()
    z = default_cutoff(2.0, p)
    assert firm_labor_demand(z, 1.0, 2.0, p) == 0.0
    assert firm_labor_demand(z + 0.1, 1.0, 2.0, p) == 0.0


def test_firm_labor_demand_rejects_invalid_wage():
    p = make()
    with pytest.raises(ModelDomainError, match="validity region"):
        firm_labor_demand(0.0, p.w_floor * 0.99, 1.0, p)


@settings(max_examples=50, deadline=None)
@given(w=st.floats(0.3, 5.0), P=st.floats(0.6, 50.0), Z=st.floats(0.0, 1.99))
def test_firm_demand_matches_constraint_root(w, P, Z):
    p = make()
    got = firm_labor_demand(Z, w, P, p)
    ref = firm_labor_by_root(Z, w, P, dict(alpha=0.5, A=1.0, xi=0.5, K0=2.0, D0=1.0))
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(w=st.floats(0.3, 5.0), P=st.floats(0.6, 50.0))
def test_firm_demand_strictly_decreasing_below_cutoff(w, P):
    p = make()
    z = np.linspace(0.0, default_cutoff(P, p), 50)[:-1]
    assert np.all(np.diff(firm_labor_demand(z, w, P, p)) < 0)


def _random_params(rng, family):
    K0 = rng.uniform(1.5, 4.0)
    G = (ShockDistribution("uniform", 0.0, K0) if family == "uniform"
         else ShockDistribution("truncnorm", 0.0, K0, mu=rng.uniform(0, K0),
                                sigma=rng.uniform(0.3, 2.0)))
    return ModelParams(alpha=rng.uniform(0.2, 0.8), A=rng.uniform(1, 4),
                       xi=rng.uniform(0.01, 0.5), epsilon=rng.uniform(1.5, 5),
                       chi=rng.uniform(0.5, 2), varphi=rng.uniform(0.2, 2), psi=0.01,
                       K0=K0, D0=rng.uniform(0.1, 1.2), W0=1.0, G=G)


@pytest.mark.parametrize("family", ["uniform", "truncnorm"])
def test_aggregate_demand_equals_quadrature(family):
    rng = np.random.default_rng(11)
    for _ in range(10):
        p = _random_params(rng, family)
        P = rng.uniform(1, 10)
        w = p.w_floor * rng.uniform(1.5, 4)
        ref = aggregate_demand_quad(w, P, vars(p), p.G.pdf, p.G.z_lo, p.G.z_hi)
        assert aggregate_labor_demand(w, P, p) == pytest.approx(ref, rel=1e-8)


def test_aggregate_demand_degenerate_mass_point():
    # all firms at one z: a very narrow uniform approaches the single-firm formula
    p = make(D0=0.0, G=ShockDistribution("uniform", 0.5, 0.5 + 1e-9))
    assert aggregate_labor_demand(1.0, 1.0, p) == pytest.approx(
        firm_labor_demand(0.5, 1.0, 1.0, p), rel=1e-8)


def test_demand_price_derivative_has_no_cutoff_mass_term(params):
    w = 1.3
    for P in (1.0, 2.5, 10.0):
        h = 1e-5 * P
        fd = (aggregate_labor_demand(w, P + h, params)
              - aggregate_labor_demand(w, P - h, params)) / (2 * h)
        mass = params.G.cdf(default_cutoff(P, params))
        analytic = mass * params.D0 / P ** 2 / demand_denominator(w, params)
        assert fd > 0
        assert fd == pytest.approx(analytic, rel=1e-6)


def test_labor_supply_examples():
    p = make()
    assert p.L_max == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    assert labor_supply_wage(1e-12, 1.0, p) < 1e-10
    assert labor_supply_wage(p.L_max * (1 - 1e-9), 1.0, p) > 1e6
    with pytest.raises(ModelDomainError):
        labor_supply_wage(p.L_max, 1.0, p)
    # doubling D0 doubles G(Z*) D0 / P here because Z* stays above the support
    p1 = make(K0=10.0, G=ShockDistribution("uniform", 0.0, 2.0), D0=1.0)
    p2 = p1.replace(D0=2.0)
    assert labor_supply_wage(0.3, 1.0, p2) == pytest.approx(2 * labor_supply_wage(0.3, 1.0, p1),
                                                            rel=1e-14)


def test_labor_supply_strictly_increasing():
    p = make()
    L = np.linspace(0.01, p.L_max * 0.999, 200)
    w = [labor_supply_wage(x, 1.0, p) for x in L]
    assert np.all(np.diff(w) > 0)


def test_labor_supply_undefined_without_debt():
    with pytest.raises(ModelDomainError, match="inelastic"):
        labor_supply_wage(0.3, 1.0, make(D0=0.0))


def test_params_validation_lists_problems():
    with pytest.raises(ValueError, match="alpha.*xi"):
        make(alpha=1.2, xi=0.0)
    with pytest.raises(ValueError, match="W0"):
        make(W0=0.0)
    with pytest.raises(ValueError):
        ShockDistribution("uniform", 1.0, 1.0)
    with pytest.raises(ValueError):
        ShockDistribution("pareto", 0.0, 1.0)


@pytest.mark.parametrize("G", [ShockDistribution("uniform", 0.0, 3.0),
                               ShockDistribution("truncnorm", 0.0, 3.0, mu=1.0, sigma=0.7)])
def test_shock_distribution_invariants(G):
    z = np.linspace(-1, 4, 101)
    cdf = G.cdf(z)
    assert np.all(np.diff(cdf) >= 0)
    assert G.cdf(G.z_lo) == 0.0 and G.cdf(G.z_hi) == pytest.approx(1.0, abs=1e-15)
    assert np.all(G.pdf(np.linspace(0, 3, 50)) >= 0)
    q = np.linspace(0.01, 0.99, 25)
    assert G.cdf(G.ppf(q)) == pytest.approx(q, abs=1e-12)


# -- firms ------------------------------------------------------------------

def test_firm_allocation_invariants(params):
    eq = flexible_equilibrium(3.0, params)
    Z = np.linspace(params.G.z_lo, params.G.z_hi, 41)
    f = eq.firms(Z)
    assert np.array_equal(f.active, Z <= eq.Zstar)
    off = ~f.active
    assert np.all(f.K[off] == 0) and np.all(f.L[off] == 0) and np.all(f.J[off] == 0)
    on = f.active & (f.L > 0)
    ratio = f.K[on] / f.L[on]
    assert ratio == pytest.approx(params.alpha / (1 - params.alpha) * eq.w, rel=1e-12)
    J = (1 - params.xi) * params.A * f.K[on] ** params.alpha * f.L[on] ** (1 - params.alpha)
    assert f.J[on] == pytest.approx(J, rel=1e-12)


def test_firm_value_forms_agree():
    p = make()
    Z = np.linspace(0, 1.4, 30)
    a = firm_value(Z, 1.2, 2.0, p, form="allocation")
    b = firm_value(Z, 1.2, 2.0, p, form="closed")
    assert a == pytest.approx(b, rel=1e-12)
    assert firm_value(default_cutoff(2.0, p), 1.2, 2.0, p) == 0.0
    with pytest.raises(ValueError):
        firm_value(0.0, 1.2, 2.0, p, form="other")


def test_firm_value_vanishes_as_pledgeable_share_approaches_one():
    p = make(xi=1 - 1e-12, A=1e-3)
    assert firm_value(0.0, 1.0, 2.0, p) < 1e-12


def test_multiplier_sign_matches_wage_bounds(params):
    assert constraint_multiplier(params.w_constrained_max * 0.999, params) > 0
    assert constraint_multiplier(params.w_constrained_max * 1.001, params) < 0
    assert demand_denominator(params.w_floor * 1.001, params) > 0
    assert demand_denominator(params.w_floor * 0.999, params) < 0


# -- equilibrium --------------------------------------------------------------

def test_flexible_equilibrium_residual_and_grid_oracle(params):
    p = dict(vars(params), z_lo=params.G.z_lo, z_hi=params.G.z_hi)
    for P in (1.0, 1.7, 5.0, 40.0):
        eq = flexible_equilibrium(P, params)
        assert eq.residual_demand_supply < 1e-10
        assert eq.regime == "adjusted" and eq.lambda_ok
        assert eq.L == pytest.approx(equilibrium_by_grid(P, p), rel=1e-6)
        assert eq.w == pytest.approx(labor_supply_wage(eq.L, P, params), rel=1e-14)


def test_resource_residual_equals_truncated_mean(params):
    # the accounting gap is exactly the capital shocks absorbed by survivors
    for P in (1.0, 3.0, 25.0):
        eq = flexible_equilibrium(P, params)
        assert eq.resource_residual == pytest.approx(
            params.G.partial_mean(params.G.clamp(eq.Zstar)), rel=1e-10)
    assert flexible_equilibrium(1.0, params).resource_residual == pytest.approx(1.125, rel=1e-12)


def test_zero_debt_branch_is_inelastic():
    p = default_params().replace(D0=0.0)
    eq = flexible_equilibrium(2.0, p)
    assert eq.L == p.L_max
    assert aggregate_labor_demand(eq.w, 2.0, p) == pytest.approx(p.L_max, rel=1e-12)
    assert aggregate_labor_demand(1.3, 1.0, p) == aggregate_labor_demand(1.3, 50.0, p)


def test_unconstrained_branch_raises():
    # the literal alternative calibration puts the wage beyond the constrained region
    p = make()
    with pytest.raises(UnconstrainedFirmError, match="multiplier"):
        flexible_equilibrium(1.0, p)


def test_no_equilibrium_raises():
    p = make(A=3.0, xi=0.05, K0=4.0, D0=3.99, G=ShockDistribution("uniform", 3.995, 4.0))
    with pytest.raises((NoEquilibriumError, UnconstrainedFirmError)):
        flexible_equilibrium(1.0, p)


def test_equilibrium_labor_nondecreasing_in_P(params):
    L = [flexible_equilibrium(P, params).L for P in np.linspace(1, 20, 50)]
    assert np.all(np.diff(L) >= -1e-12)


def test_rigid_allocation_consistency(params):
    eq = flexible_equilibrium(2.0, params)
    r = rigid_allocation(2.0, eq.W, params)
    assert r.regime == "rigid"
    assert r.L == pytest.approx(eq.L, rel=1e-10)
    assert r.household_consumption == pytest.approx(r.w * r.L + (1 - r.default_share)
                                                    * params.D0 / 2.0, rel=1e-14)
    assert r.utility_stay == pytest.approx(worker_utility(r.w, r.L, 2.0, params), rel=1e-14)
    Ls = [rigid_allocation(P, params.W0, params).L for P in np.linspace(1, 3, 20)]
    assert np.all(np.diff(Ls) > 0)


def test_rigid_allocation_rejects_infeasible_wage(params):
    with pytest.raises(ModelDomainError):
        rigid_allocation(1e6, params.W0, params)
    with pytest.raises(ModelDomainError, match="consumption"):
        worker_utility(-10.0, 1.0, 1.0, params)


def test_menu_cost_self_consistency(params):
    # with W0 equal to the flexible nominal wage both branches coincide
    p = params.replace(psi=0.0)
    eq = flexible_equilibrium(1.0, p)
    mc = menu_cost_equilibrium(1.0, p.replace(W0=eq.W))
    assert mc.L == pytest.approx(eq.L, rel=1e-10)
    assert mc.w == pytest.approx(eq.w, rel=1e-12)


@pytest.mark.parametrize("P", [1.0, 1.02, 1.5, 3.0, 10.0, 60.0])
def test_menu_cost_regime_matches_utility_comparison(params, P):
    eq = menu_cost_equilibrium(P, params)
    if eq.regime == "adjusted":
        assert eq.utility_adjust > eq.utility_stay
    else:
        assert eq.utility_stay >= eq.utility_adjust


def test_zero_menu_cost_gap_is_first_order(params):
    p = params.replace(psi=0.0)
    gaps = []
    for d in (1e-4, 2e-4, 4e-4):
        eq = menu_cost_equilibrium(1.0 + d, p)
        gaps.append(eq.utility_adjust - eq.utility_stay)
        assert eq.regime == "adjusted"
    # doubling the step doubles the gap: linear, not quadratic
    assert gaps[1] / gaps[0] == pytest.approx(2.0, rel=1e-2)
    assert gaps[2] / gaps[1] == pytest.approx(2.0, rel=1e-2)


def test_regime_map_single_switch(params):
    grid = np.linspace(1, 100, 200)
    table = sweep(grid, params)
    assert count_regime_switches(table["regime"]) == 1
    assert table["regime"].iloc[0] == "rigid" and table["regime"].iloc[-1] == "adjusted"
    rigid = sweep(grid, params.replace(psi=1e6))
    assert set(rigid["regime"]) == {"rigid"}


# -- sweeps -------------------------------------------------------------------

def test_sweep_singleton_and_determinism(params):
    one = sweep([2.5], params)
    direct = menu_cost_equilibrium(2.5, params).as_row()
    for c in SWEEP_COLUMNS:
        assert one[c].iloc[0] == direct[c] or (c == "utility_stay" and math.isnan(direct[c]))
    grid = np.linspace(1, 30, 25)
    a = sweep(grid, params)
    b = sweep(grid, params, threads=4)
    assert a.equals(b)
    assert np.all(np.diff(a["default_share"]) <= 0)


def test_sweep_records_failures():
    table = sweep([1.0, 2.0], make(), kind="flexible")
    assert list(table["regime"]) == ["error", "error"]
    assert table["error"].str.contains("multiplier").all()
    assert table["L"].isna().all()


def test_sweep_rejects_bad_grids(params):
    for g in ([], [2.0, 1.0], [0.0, 1.0], [1.0, np.inf]):
        with pytest.raises(ValueError):
            sweep(g, params)


def test_comparative_statics(params):
    cs = comparative_statics_D0(np.linspace(1, 100, 50), [1.5, 0.0, 0.5], params)
    assert cs.holds()
    assert list(cs.table["D0"].iloc[:3]) == [1.5, 0.0, 0.5]
    zero = cs.table[cs.table["D0"] == 0.0]
    assert np.allclose(zero["demand_increment"], 0.0, atol=1e-15)
    assert (cs.table["demand_increment"] >= 0).all()


def test_cross_partial_sign_condition():
    # with uniform [0, K0], the larger debt raises demand faster iff K0 > 2 D0 / P
    p = make(A=3.0, xi=0.05)
    w = 1.5
    cs = comparative_statics_D0([1.0], [0.5, 1.8], p, w=w)
    assert cs.margins["margin"].iloc[0] < 0
    cs = comparative_statics_D0([2.0], [0.5, 1.5], p, w=w)
    assert cs.margins["margin"].iloc[0] > 0


@settings(max_examples=40, deadline=None)
@given(D0=st.floats(0.0, 3.0), P=st.lists(st.floats(0.2, 500.0), min_size=2, max_size=30,
                                         unique=True))
def test_default_share_nonincreasing_property(D0, P):
    p = make(D0=D0)
    shares = [default_share(x, p) for x in sorted(P)]
    assert all(0 <= s <= 1 for s in shares)
    assert np.all(np.diff(shares) <= 0)


@settings(max_examples=40, deadline=None)
@given(K0=st.floats(0.1, 10), D0=st.floats(0, 10), P=st.floats(1e-3, 1e3))
def test_cutoff_closed_form_property(K0, D0, P):
    p = make(K0=K0, D0=D0, G=ShockDistribution("uniform", 0.0, K0))
    assert default_cutoff(P, p) == pytest.approx(K0 - D0 / P, rel=1e-15, abs=1e-15)


def test_default_curve_shape(params):
    curve = default_curve(np.geomspace(1, 100, 200), params, firm_mass=1000)
    counts = curve["default_count"].to_numpy()
    assert list(curve.columns) == ["P", "log_inflation", "default_count"]
    assert np.all(np.diff(counts) <= 0)
    # uniform G: default share D0 / (K0 P) is convex in log P
    expected = 1000 * params.D0 / (params.K0 * curve["P"].to_numpy())
    assert counts == pytest.approx(expected, rel=1e-12)
    d2 = np.diff(counts, 2)
    assert np.all(d2[len(d2) // 10:] >= 0)


def test_truncnorm_partial_mean_matches_scipy():
    G = ShockDistribution("truncnorm", 0.0, 3.0, mu=1.0, sigma=0.8)
    a, b = (0 - 1) / 0.8, (3 - 1) / 0.8
    ref = stats.truncnorm(a, b, loc=1.0, scale=0.8).expect(lambda z: z, lb=0.0, ub=2.0)
    assert G.partial_mean(2.0) == pytest.approx(ref, rel=1e-8)


def test_firm_allocations_debt_is_pledged_output(params):
    f = firm_allocations([0.0, 1.0], 1.3, 2.0, params)
    Y = f.J / (1 - params.xi)
    assert f.D == pytest.approx(params.xi * 2.0 * Y, rel=1e-14)
