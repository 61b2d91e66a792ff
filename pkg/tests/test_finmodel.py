import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clearnet.exceptions import (
    ConfigError,
    ContractViolation,
    OutsideHypothesesError,
    OverLendingWarning,
)
from clearnet.finmodel import (
    CaseTag,
    FinanceParams,
    ShockReturns,
    bank_portfolios,
    classify_regime,
    clearing_statistics,
    closed_form_g1,
    closed_form_g2,
    draw_shocks,
    finite_clearing_map,
    limit_aggregates_numeric,
    limit_map,
    measures,
    portfolio,
    sample_shocks,
    solve_limit,
    theory_single_group,
)
from clearnet.fpcore import FPConfig, iterate_fp, picard
from clearnet.netgraph import EtaMode, ModelParams, sample_graph

# x = c * (0.2 * (x - 2) + 0.8 * 35) with c = 0.999
X_SINGLE = 27.6 * 0.999 / (1 - 0.2 * 0.999)


def small_shock(**kwargs) -> FinanceParams:
    return FinanceParams.two_group_common(u=0.5, d=-0.35, kappa=0.175, **kwargs)


def test_single_group_portfolio():
    r = portfolio(FinanceParams.single_group_reference())
    assert r.omega2 == pytest.approx(12.5)
    assert r.kd2 == pytest.approx(5.0)
    assert r.ku2 == pytest.approx(15.0)
    assert r.v2 == pytest.approx(7.0)
    assert r.lbar2 == pytest.approx(13.0)
    assert FinanceParams.single_group_reference().ybar2 == pytest.approx(35.0)


def test_two_group_balance_sheet():
    params = small_shock()
    assert params.k0 * (1 + params.u - params.dc) == pytest.approx(40.0)
    assert params.ybar1 == pytest.approx(50.0)
    assert params.ybar2 == pytest.approx(50.0)
    assert params.lambda2 == 1.0
    assert params.mu1 == 0.0


def test_mu1():
    params = small_shock(yc=5.0)
    assert params.lambda2 == pytest.approx(params.y2 / (params.y2 + 5.0))
    assert params.mu1 == pytest.approx(5.0 / params.y2 / 0.8)


def test_over_lending():
    with pytest.warns(OverLendingWarning):
        r = portfolio(small_shock(yc=40.0))
    assert r.omega1 == 0.0
    assert r.kd1 == r.ku1 == r.v1 == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(d=0.2),
        dict(r1=0.13),
        dict(y2=0.0),
        dict(gamma=1.0),
        dict(kappa=0.2, v1=1.0, v2=1.0),
        dict(kappa=None, v2=1.0),
        dict(r1=None),
    ],
)
def test_invalid_finance(kwargs):
    values = small_shock().dump()
    values.update(kwargs)
    with pytest.raises(ConfigError):
        FinanceParams(**values)


def test_single_group_forbids_inter_group_lending():
    values = FinanceParams.single_group_reference().dump()
    with pytest.raises(ConfigError):
        FinanceParams(**{**values, "yc": 1.0})


def test_explicit_taxes():
    values = small_shock().dump()
    values.update(kappa=None, v1=2.0, v2=3.0)
    params = FinanceParams(**values)
    r = portfolio(params)
    assert (r.v1, r.v2) == (2.0, 3.0)
    assert classify_regime(params).burden == pytest.approx(params.dc)


def test_closed_form_partial_branch():
    branch = closed_form_g2(FinanceParams.single_group_reference())
    assert branch.x == pytest.approx(X_SINGLE, abs=1e-10)
    assert branch.x == pytest.approx(34.4568, abs=1e-4)
    assert branch.pd == pytest.approx(0.2)
    assert branch.case_tag is CaseTag.PARTIAL


def test_closed_form_resilient_branch():
    params = FinanceParams.single_group_reference(kappa=0.1)
    branch = closed_form_g2(params)
    assert branch.case_tag is CaseTag.RESILIENT
    assert branch.pd == 0.0
    assert branch.x == pytest.approx(35.0 * 0.999)


def test_all_liabilities_to_big_node():
    branch = closed_form_g2(small_shock(p_sb2=1.0))
    assert branch.x == 0.0


@settings(max_examples=60, deadline=None)
@given(
    w=st.floats(0.0, 1.0),
    p_sb2=st.floats(0.01, 0.39),
    kappa=st.floats(0.0, 1.2),
)
def test_closed_form_matches_numeric(w, p_sb2, kappa):
    params = FinanceParams.single_group_reference(w=w, p_sb2=p_sb2, kappa=kappa)
    _, numeric = limit_aggregates_numeric(params)
    assert closed_form_g2(params).x == pytest.approx(numeric, abs=1e-6)


@pytest.mark.parametrize("yc", [0.0, 2.5, 5.0])
def test_two_group_closed_form_matches_numeric(yc):
    params = small_shock(yc=yc)
    x1, x2 = limit_aggregates_numeric(params)
    g2 = closed_form_g2(params)
    assert g2.x == pytest.approx(x2, abs=1e-8)
    assert closed_form_g1(params, g2.x).x == pytest.approx(x1, abs=1e-8)


def test_closed_form_g1_needs_two_groups():
    with pytest.raises(ConfigError):
        closed_form_g1(FinanceParams.single_group_reference(), 30.0)


def test_single_group_measures():
    params = FinanceParams.single_group_reference()
    result = measures(params, None, X_SINGLE)
    assert result.es1 is None and result.pd1 is None
    assert result.es2 == pytest.approx(0.8 * (X_SINGLE + 8 - 35))
    assert result.es2 == pytest.approx(5.9654, abs=2e-4)
    assert result.sau2 == pytest.approx(X_SINGLE + 8 - 35)
    assert result.pd2 == pytest.approx(0.2)


def test_theory_single_group():
    x, es = theory_single_group(FinanceParams.single_group_reference())
    assert x == pytest.approx(X_SINGLE)
    assert es == pytest.approx(0.8 * (X_SINGLE + 8 - 35))


def test_theory_without_shocks():
    x, es = theory_single_group(FinanceParams.single_group_reference(w=0.0))
    assert x == pytest.approx(35.0 * 0.999)
    assert es == pytest.approx(8 + 35.0 * 0.999 - 35)


def test_theory_needs_taxes_above_down_return():
    with pytest.raises(OutsideHypothesesError):
        theory_single_group(FinanceParams.single_group_reference(kappa=0.3))


def test_solve_limit_single_group():
    solution = solve_limit(FinanceParams.single_group_reference())
    assert solution.x1_inf is None and solution.case_tag_g1 is None
    assert solution.x2_inf == pytest.approx(X_SINGLE)
    assert solution.es2 == pytest.approx(5.9655, abs=1e-4)
    assert solution.dump()["case_tag_g2"] == "partial"


def test_solve_limit_small_shock():
    solution = solve_limit(small_shock())
    assert solution.x2_inf == pytest.approx(40.0)
    assert solution.x1_inf == pytest.approx(49.5)
    assert solution.pd1 == 0.0 and solution.pd2 == 0.0
    assert solution.case_tag_g1 is CaseTag.RESILIENT
    assert solution.case_tag_g2 is CaseTag.RESILIENT


def test_regime_small_shock():
    report = classify_regime(small_shock())
    assert report.delta_r == pytest.approx(0.295)
    assert report.delta_u == pytest.approx(0.38)
    assert report.burden == pytest.approx(0.275)
    assert report.slope_es1_sign == "-"
    assert report.slope_sau_sign == "+"
    assert report.resilient_g1 and report.resilient_g2
    assert not report.systemic_g2
    assert report.g1_robust_applicable


def test_regime_sign_at_equality():
    report = classify_regime(FinanceParams.two_group_common(u=0.6, d=-0.35, kappa=0.38, w=0.0))
    assert report.slope_es1_sign == "0"
    assert report.slope_sau_sign == "0"


def test_regime_single_group():
    report = classify_regime(FinanceParams.single_group_reference())
    assert report.resilient_g1 is None
    assert not report.resilient_g2
    assert not report.g1_robust_applicable


def test_es1_linear_in_inter_group_lending():
    grid = np.arange(0.0, 5.5, 1.0)
    es1 = [solve_limit(small_shock(yc=yc)).es1 for yc in grid]
    report = classify_regime(small_shock())
    slope = report.burden - report.delta_r
    assert np.allclose(np.diff(es1), slope, atol=1e-9)


def isolated_node(w: float = 0.2):
    params = FinanceParams.single_group_reference(w=w)
    sample = sample_graph(params.model_params(0.05), 1, seed=0, reject_isolated=False)
    return params, sample


@pytest.mark.parametrize("shock, expected", [(5.0, 0.0), (15.0, 8.0)])
def test_clearing_map_single_node(shock, expected):
    params, sample = isolated_node()
    clearing, ybar = finite_clearing_map(sample, np.array([shock]), params)
    assert ybar[0] == pytest.approx(35.0)
    result = iterate_fp(clearing, ybar)
    assert result.solution[0] == pytest.approx(expected, abs=1e-3)


def test_clearing_map_checks_shapes():
    params, sample = isolated_node()
    with pytest.raises(ConfigError):
        finite_clearing_map(sample, np.zeros(3), params)


def test_clearing_map_checks_group_mode():
    params = small_shock()
    sample = sample_graph(ModelParams.single(0.5), 4, seed=0)
    with pytest.raises(ConfigError):
        finite_clearing_map(sample, np.zeros(4), params)


def test_clearing_map_is_monotone_and_bounded():
    params = FinanceParams.single_group_reference()
    sample = sample_graph(params.model_params(0.05), 200, seed=5)
    shocks = sample_shocks(sample, params, seed=6)
    clearing, ybar = finite_clearing_map(sample, shocks, params)
    rng = np.random.default_rng(0)
    for _ in range(20):
        low = rng.random(200) * ybar
        high = np.minimum(low + rng.random(200) * 5.0, ybar)
        f_low, f_high = clearing(low), clearing(high)
        assert np.all(f_low <= f_high + 1e-12)
        assert np.all((f_high >= 0.0) & (f_high <= ybar))


def test_sample_shocks_without_randomness():
    r = portfolio(FinanceParams.single_group_reference())
    for w, expected in ((0.0, r.ku2), (1.0, r.kd2)):
        params = FinanceParams.single_group_reference(w=w)
        sample = sample_graph(params.model_params(0.5), 20, seed=1)
        shocks = sample_shocks(sample, params, seed=2, balance_sheets="limit")
        assert np.allclose(shocks, expected)


def test_realized_shocks_follow_bank_portfolios():
    params = FinanceParams.single_group_reference()
    sample = sample_graph(params.model_params(0.1), 300, seed=1)
    draw = draw_shocks(sample, params, seed=2)
    omega = bank_portfolios(sample, params)
    factor = np.where(draw.down, 1.0 + params.d - params.dc, 1.0 + params.u - params.dc)
    assert np.allclose(draw.values, omega * factor)
    assert omega.std() > 0.0
    assert omega.mean() == pytest.approx(portfolio(params).omega2, rel=0.02)


def test_bank_portfolios_on_complete_graph():
    params = FinanceParams.single_group_reference()
    model = ModelParams.single(1.0, params.p_sb2, eta_mode=EtaMode.CONSTANT, self_loops=True)
    sample = sample_graph(model, 15, seed=0)
    assert np.allclose(bank_portfolios(sample, params), portfolio(params).omega2)


def test_bank_portfolios_two_groups():
    params = small_shock(yc=5.0)
    model = params.model_params(0.4, p1=0.4, pc=0.4, eta_mode=EtaMode.CONSTANT)
    sample = sample_graph(model, 400, seed=3)
    omega = bank_portfolios(sample, params)
    r = portfolio(params)
    assert omega[sample.groups == 1].mean() == pytest.approx(r.omega1, rel=0.01)
    assert omega[sample.groups == 2].mean() == pytest.approx(r.omega2, rel=0.01)


def test_unknown_balance_sheets():
    params, sample = isolated_node()
    with pytest.raises(ConfigError):
        draw_shocks(sample, params, seed=0, balance_sheets="average")


def test_sample_shocks_frequency():
    params = FinanceParams.single_group_reference()
    sample = sample_graph(params.model_params(0.01), 2000, seed=3)
    draw = draw_shocks(sample, params, seed=4)
    down = int(np.sum(draw.down))
    assert abs(down - 400) < 4 * np.sqrt(2000 * 0.2 * 0.8)
    assert np.array_equal(draw.values, sample_shocks(sample, params, seed=4))


def test_clearing_statistics_without_shocks():
    params = FinanceParams.single_group_reference(w=0.0)
    sample = sample_graph(params.model_params(0.1), 100, seed=8)
    draw = draw_shocks(sample, params, seed=9)
    clearing, ybar = finite_clearing_map(sample, draw.values, params)
    result = iterate_fp(clearing, ybar, FPConfig(tol_delta=1e-10, window_k=5))
    stats = clearing_statistics(sample, draw.values, result.solution, params, draw.down)
    assert list(stats) == [2]
    assert stats[2].shock_frac == 0.0
    assert 0.0 <= stats[2].default_frac <= 1.0
    assert stats[2].sau_mean == pytest.approx(stats[2].surplus_mean)


def test_clearing_statistics_checks_flags():
    params, sample = isolated_node()
    with pytest.raises(ConfigError):
        clearing_statistics(sample, np.array([5.0]), np.array([0.0]), params, np.zeros(3))


def test_shock_returns_check_ordering():
    values = portfolio(small_shock()).dump()
    values.update(kd2=values["ku2"] + 1.0)
    with pytest.raises(ContractViolation):
        ShockReturns(**values)


def explicit_taxes(v1: float, v2: float, **kwargs) -> FinanceParams:
    values = FinanceParams.two_group_common(u=0.5, d=-0.35, kappa=0.0, p_sb1=0.3).dump()
    values.update(kappa=None, v1=v1, v2=v2, **kwargs)
    return FinanceParams(**values)


def down_wiped(v2: float) -> FinanceParams:
    # kd2 = 9.786, ku2 = 78.286, ybar2 = 50
    return FinanceParams(
        k0=40.0,
        y1=50.0 / 1.1,
        y2=50.0 / 1.12,
        r1=0.1,
        r2=0.12,
        u=0.7,
        d=-0.7,
        w=0.1,
        dc=0.1,
        v1=5.0,
        v2=v2,
        p_sb1=0.3,
        p_sb2=0.2,
        gamma=0.5,
    )


BRANCH_FAMILIES = [
    (2, CaseTag.RESILIENT, lambda v: explicit_taxes(5.0, v), 0.0, 9.0),
    (2, CaseTag.PARTIAL, lambda v: explicit_taxes(5.0, v), 12.0, 38.0),
    (2, CaseTag.SYSTEMIC, lambda v: explicit_taxes(5.0, v), 40.3, 43.2),
    (2, CaseTag.DOWN_WIPED_SYSTEMIC, lambda v: explicit_taxes(5.0, v), 44.5, 51.5),
    (2, CaseTag.DOWN_WIPED, down_wiped, 47.0, 63.0),
    (1, CaseTag.RESILIENT, lambda v: explicit_taxes(v, 5.0), 0.0, 7.5),
    (1, CaseTag.PARTIAL, lambda v: explicit_taxes(v, 5.0), 9.0, 22.5),
    (1, CaseTag.SYSTEMIC, lambda v: explicit_taxes(v, 5.0, k0=2.0, p_sb1=0.5), 9.2, 13.0),
]


@pytest.mark.parametrize(
    "group, tag, build, low, high",
    BRANCH_FAMILIES,
    ids=[f"g{group}-{tag.value}" for group, tag, *_ in BRANCH_FAMILIES],
)
def test_closed_form_branches(group, tag, build, low, high):
    rng = np.random.default_rng(len(tag.value) * 10 + group)
    for v in rng.uniform(low, high, size=130):
        params = build(float(v))
        solution = solve_limit(params)
        assert (solution.case_tag_g1, solution.case_tag_g2)[group - 1] is tag

        fmap, _ = limit_map(params)
        x = np.array([solution.x1_inf, solution.x2_inf])
        assert np.max(np.abs(fmap(x) - x)) < 1e-9

        x1, x2 = limit_aggregates_numeric(params)
        assert abs(x1 - solution.x1_inf) < 1e-8
        assert abs(x2 - solution.x2_inf) < 1e-8


def test_closed_form_continuous_across_branches():
    taxes = np.round(np.arange(0.0, 60.0 + 1e-9, 0.01), 2)
    solutions = [closed_form_g2(explicit_taxes(5.0, float(v))) for v in taxes]
    x2 = np.array([s.x for s in solutions])
    assert np.all(np.abs(np.diff(x2)) <= 4.0 * 0.01 + 1e-9)
    assert np.all(np.diff(x2) <= 1e-9)
    tags = {s.case_tag for s in solutions}
    assert {CaseTag.RESILIENT, CaseTag.PARTIAL, CaseTag.SYSTEMIC} <= tags


@pytest.mark.parametrize("seed", range(50))
def test_damped_iteration_matches_picard_on_small_networks(seed):
    rng = np.random.default_rng(seed)
    params = FinanceParams.single_group_reference(
        w=rng.uniform(0.1, 0.9), p_sb2=rng.uniform(0.05, 0.3)
    )
    sample = sample_graph(params.model_params(0.6, eta_mode=EtaMode.CONSTANT), 6, seed=seed)
    draw = draw_shocks(sample, params, seed=seed + 100)
    clearing, ybar = finite_clearing_map(sample, draw.values, params)

    damped = iterate_fp(clearing, ybar, FPConfig(step_eps=0.5, tol_delta=1e-12, window_k=5))
    assert damped.converged
    exact = picard(clearing, ybar, tol=1e-12)
    assert np.max(np.abs(damped.solution - exact)) < 1e-8


def resilient_group2_draw(rng: np.random.Generator) -> FinanceParams:
    y1, y2 = rng.uniform(30.0, 60.0, size=2)
    p_sb2 = rng.uniform(0.01, 0.3)
    r1 = rng.uniform(0.06, 0.1)
    return FinanceParams(
        k0=rng.uniform(30.0, 60.0),
        y1=y1,
        y2=y2,
        yc=rng.uniform(0.0, 10.0),
        r1=r1,
        r2=r1 + rng.uniform(0.005, 0.05),
        u=rng.uniform(0.2, 0.8),
        d=rng.uniform(-0.3, 0.05),
        w=rng.uniform(0.05, 0.95),
        dc=rng.uniform(0.0, 0.1),
        kappa=rng.uniform(0.0, 0.3),
        p_sb1=rng.uniform(0.0, 1.0) * y2 * p_sb2 / y1,
        p_sb2=p_sb2,
        gamma=rng.uniform(0.3, 0.7),
    )


def test_resilient_group2_keeps_group1_resilient():
    # y1 * p_sb1 < y2 * p_sb2 with proportional taxes
    rng = np.random.default_rng(11)
    resilient = 0
    for _ in range(5000):
        params = resilient_group2_draw(rng)
        assert params.y1 * params.p_sb1 < params.y2 * params.p_sb2
        solution = solve_limit(params)
        if solution.pd2 != 0.0:
            continue
        assert solution.pd1 == 0.0
        resilient += 1
        if resilient == 200:
            break
    assert resilient == 200
