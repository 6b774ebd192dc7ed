import math

import numpy as np
import pytest
from hypothesis import given

from conftest import discrete_scales, grid_scales, raw_scales
from timescales.calculus import TsFunction, delta_derivative, delta_integral, nabla_integral
from timescales.duality import (
    DUAL_REGULARITY,
    FUNCTION_IDENTITIES,
    SCALE_IDENTITIES,
    DualPair,
    all_passed,
    dual_function,
    dual_scale,
    run_duality_matrix,
    verify_classification_duality,
    verify_derivative_duality,
    verify_graininess_duality,
    verify_integral_duality,
    verify_jump_duality,
    verify_kappa_duality,
    verify_regularity_transport,
)
from timescales.errors import ResultEmpty
from timescales.report import REPORT_FIELDS, IdentityReport
from timescales.timescale import canonicalize, random_scale

FUNCS = ["t^2", "t^3", "exp(t)", "sin(t)", "t*exp(t)"]


def fn(source, T, regularity="smooth"):
    return TsFunction.from_source(source, T, regularity)


def segs(T):
    return [list(s) for s in T.segments]


# -- reports ------------------------------------------------------------------


def test_report_pass_rule_and_fields():
    r = IdentityReport("x", "T", 3, 1e-9, 1e-8)
    assert r.passed
    assert not IdentityReport("x", "T", 3, 2e-8, 1e-8).passed
    assert list(r.to_dict()) == list(REPORT_FIELDS)
    assert not IdentityReport.failure("x", "T", "boom").passed


# -- dual objects ------------------------------------------------------------------


def test_dual_scale_examples():
    assert segs(dual_scale(canonicalize([[2, 5]]))) == [[-5, -2]]
    assert segs(dual_scale(canonicalize([[0, 1], 2]))) == [[-2, -2], [-1, 0]]
    # no negative zero sneaks into literals
    assert str(dual_scale(canonicalize([[0, 1]]))) == "[[-1.0, 0.0]]"


def test_dual_scale_is_pointwise_negation():
    T = canonicalize([[-3, -1], 0.5, [2, 4]])
    S = dual_scale(T)
    for t in np.linspace(-5, 5, 401):
        assert T.contains(float(t)) == S.contains(float(-t))


def test_dual_scale_involution_on_random_scales():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        T = random_scale(rng)
        assert dual_scale(dual_scale(T)) == T


@given(raw_scales())
def test_dual_pair(T):
    pair = DualPair.of(T)
    assert pair.dual == dual_scale(T)
    assert DualPair.of(pair.dual).dual == T


def test_dual_function_examples():
    U = canonicalize([[0, 1]])
    d = dual_function(fn("t^2", U))
    assert str(d.expr) == "(-t)^2" and segs(d.scale) == [[-1, 0]]
    assert d(-0.5) == 0.25
    assert dual_function(fn("t", U, "C1_rd")).regularity == "C1_ld"
    for source in FUNCS:
        f = fn(source, U)
        back = dual_function(dual_function(f))
        for t in U.sample_points():
            assert abs(back(t) - f(t)) <= 1e-15


def test_dual_function_of_a_table():
    T = canonicalize([0, 1, 3])
    f = TsFunction.from_table([(0, 5.0), (1, 6.0), (3, 8.0)], T)
    d = dual_function(f)
    assert d(-3.0) == 8.0 and d(0.0) == 5.0


def test_regularity_transport_table():
    assert DUAL_REGULARITY["C_rd"] == "C_ld"
    assert DUAL_REGULARITY["C1_prd"] == "C1_pld"
    assert DUAL_REGULARITY["smooth"] == "smooth"
    for tag, dual in DUAL_REGULARITY.items():
        assert DUAL_REGULARITY[dual] == tag
    assert verify_regularity_transport().passed


# -- structural identities ------------------------------------------------------


def test_jump_duality_examples():
    T = canonicalize([[0, 1], [2, 3]])
    S = dual_scale(T)
    assert S.sigma(-2) == -T.rho(2) == -1
    assert verify_jump_duality(T).max_residual == 0
    D = canonicalize([0, 1])
    assert dual_scale(D).rho(-1) == -D.sigma(1) == -1
    assert verify_jump_duality(canonicalize([[0, 1]])).passed


def test_kappa_duality_examples():
    T = canonicalize([[0, 1], 2])
    assert segs(dual_scale(T.kappa_upper())) == [[-1, 0]] == segs(dual_scale(T).kappa_lower())
    D = canonicalize([0, 1, 2])
    assert segs(dual_scale(D.kappa_lower())) == [[-2, -2], [-1, -1]] == segs(dual_scale(D).kappa_upper())
    assert verify_kappa_duality(D).max_residual == 0
    assert verify_kappa_duality(canonicalize([[0, 1]])).passed
    with pytest.raises(ResultEmpty):
        verify_kappa_duality(canonicalize([4]))


def test_graininess_duality_examples():
    T = canonicalize([[0, 1], [3, 4]])
    assert dual_scale(T).nu(-1) == T.mu(1) == 2
    D = canonicalize([0, 5])
    assert dual_scale(D).mu(-5) == D.nu(5) == 5
    assert verify_graininess_duality(T).max_residual == 0


@given(raw_scales())
def test_structural_identities_are_exact(T):
    reports = [verify_jump_duality(T), verify_graininess_duality(T), verify_classification_duality(T)]
    if not T.is_single_point:
        reports.append(verify_kappa_duality(T))
    for r in reports:
        assert r.max_residual == 0 and r.passed and r.points_checked > 0


# -- derivative and integral duality ----------------------------------------------


def test_derivative_duality_examples():
    D = canonicalize([0, 1, 2])
    f = fn("t^2", D)
    assert delta_derivative(f, 1).value == 3
    assert verify_derivative_duality(f, 1e-12).max_residual == 0
    assert verify_derivative_duality(fn("4", D), 0).max_residual == 0
    r = verify_derivative_duality(fn("exp(t)", canonicalize([[0, 1]])), 2e-8)
    assert r.passed and r.skipped == 0


@given(discrete_scales())
def test_derivative_duality_exact_on_discrete_scales(T):
    for source in FUNCS:
        r = verify_derivative_duality(fn(source, T), 1e-12)
        assert r.passed, (source, r)


@given(grid_scales(span=20))
def test_derivative_duality_on_mixed_scales(T):
    if T.is_single_point:
        return
    for source in FUNCS:
        r = verify_derivative_duality(fn(source, T), 1e-6)
        assert r.passed, (source, r)


def test_integral_duality_examples():
    T = canonicalize([[0, 1], [2, 3]])
    f = fn("1", T)
    assert delta_integral(f, 0, 3) == 3 == nabla_integral(dual_function(f), -3, 0)
    assert verify_integral_duality(f, 0, 3, 1e-12).max_residual == 0
    assert verify_integral_duality(f, 2.5, 2.5, 0).max_residual == 0
    D = canonicalize([0, 1, 2])
    g = fn("t", D)
    assert delta_integral(g, 0, 2) == 1 == nabla_integral(dual_function(g), -2, 0)


@given(grid_scales(span=20))
def test_integral_duality_on_mixed_scales(T):
    for source in FUNCS:
        r = verify_integral_duality(fn(source, T, "C_rd"), T.min, T.max, 1e-9)
        assert r.passed, (source, r)


# -- matrix -------------------------------------------------------------------------


def _three_scales():
    return {
        "unit": canonicalize([[0, 1]]),
        "points": canonicalize([0, 0.5, 1.5, 2]),
        "mixed": canonicalize([[-1, -0.5], 0, [0.25, 1], 2]),
    }


def test_matrix_three_by_four():
    scales = _three_scales()
    funcs = {f"{src}@{name}": fn(src, T) for name, T in scales.items() for src in FUNCS[:4]}
    reports = run_duality_matrix(scales, funcs, 1e-8)
    scale_rows = [r for r in reports if r.identity_name in SCALE_IDENTITIES]
    func_rows = [r for r in reports if r.identity_name in FUNCTION_IDENTITIES]
    assert len(scale_rows) == 3 * len(SCALE_IDENTITIES)
    assert len(func_rows) == 12 * len(FUNCTION_IDENTITIES)
    assert all_passed(reports), [r for r in reports if not r.passed]


def test_matrix_without_functions_runs_structural_rows_only():
    reports = run_duality_matrix(_three_scales(), [], 1e-8)
    assert {r.identity_name for r in reports} == set(SCALE_IDENTITIES)


def test_matrix_rejects_foreign_scales():
    with pytest.raises(ValueError):
        run_duality_matrix([canonicalize([[0, 1]])], [fn("t", canonicalize([[0, 2]]))], 1e-8)


def test_matrix_identity_filter_and_tolerance_override():
    scales = _three_scales()
    funcs = [fn("exp(t)", scales["mixed"])]
    reports = run_duality_matrix(scales, funcs, 1e-8, identities=["integral_duality"],
                                 tols={"integral_duality": 1e-3})
    assert [r.identity_name for r in reports] == ["integral_duality"]
    assert reports[0].tolerance == 1e-3


def test_matrix_records_failures_instead_of_raising():
    T = canonicalize([[0, 1]])

    def exploding(f):
        raise ZeroDivisionError("synthetic")

    reports = run_duality_matrix([T], [fn("t^3", T)], 1e-8, dual=exploding)
    bad = [r for r in reports if not r.passed]
    assert bad and all(math.isinf(r.max_residual) for r in bad)


def test_broken_dual_makes_derivative_rows_fail():
    """A dual that forgets the negation must be caught (t^3 is odd; t^2 would hide it)."""
    T = canonicalize([0, 1, [2, 3], 4])

    def no_negation(f):
        return TsFunction(f.expr, dual_scale(f.scale), f.regularity)

    reports = run_duality_matrix([T], [fn("t^3", T)], 1e-8, dual=no_negation)
    rows = {r.identity_name: r for r in reports}
    assert not rows["derivative_duality"].passed
    honest = run_duality_matrix([T], [fn("t^3", T)], 1e-8)
    assert all_passed(honest)


def test_randomized_matrix():
    rng = np.random.default_rng(8)
    scattered_only = []
    instances = 0
    for k in range(100):
        T = random_scale(rng, window=(-3, 3), min_gap=0.05)
        funcs = [fn(s, T) for s in FUNCS]
        instances += len(funcs)
        reports = run_duality_matrix([T], funcs, 1e-8)
        assert all_passed(reports), [r for r in reports if not r.passed]
        if T.is_discrete:
            scattered_only.extend(run_duality_matrix([T], funcs, 1e-12))
    assert instances == 500
    assert scattered_only and all_passed(scattered_only)
