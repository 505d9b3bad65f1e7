import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy as sp

from spin7.closed_form_solutions import (
    KAPPA_BAR,
    SolutionDomainError,
    SolutionParams,
    a_squared_from_f,
    bolt_z,
    classify,
    dv_dy,
    dv_dz,
    elementary_f,
    f_at_s,
    integrate_v,
    large_k_limit,
    metric_from_zv,
    ode19_residual,
    ode27_residual_y,
    ode27_residual_z,
    phase_field,
    q_factor,
    three_r_a_squared,
    triad_from_z,
    v_of_y,
    v_at_s,
    v_of_z,
)
from spin7.curvature import ricci_flat_residual
from spin7.gradient_flow import flow_rhs
from spin7.hypergeometric import HypergeometricDomainError, hyp2f1


def test_hyp2f1_against_mpmath(rng):
    params = [(1.0, 0.5, 1.25), (0.5, 0.75, 1.5), (0.3, -1.2, 2.7)]
    for a, b, c in params:
        for x in np.concatenate([rng.uniform(-5, 0.999, 45), [0.0, 0.5, 0.51, -0.99, 0.9999]]):
            want = float(mpmath.hyp2f1(a, b, c, x))
            assert hyp2f1(a, b, c, float(x)) == pytest.approx(want, rel=1e-11, abs=1e-13)


def test_hyp2f1_domain():
    with pytest.raises(HypergeometricDomainError):
        hyp2f1(0.5, 0.75, 1.5, 1.0)


def test_kappa_bar_value():
    want = 2 * mpmath.sqrt(mpmath.pi) * mpmath.gamma(1.25) / mpmath.gamma(0.75)
    assert KAPPA_BAR == pytest.approx(float(want), abs=1e-12)
    assert abs(KAPPA_BAR - 2.62206) < 5e-6


def test_v_of_y_at_origin():
    for kappa in (-1.0, 0.0, 0.7, 3.0):
        assert v_of_y(kappa, 0.0) == pytest.approx(kappa)


@pytest.mark.parametrize("k", [0.0, 0.3, 1.0, 4.0])
def test_v_of_z_solves_linear_equation(k):
    for z in (0.05, 0.3, 0.6, 0.9, 0.99, 1.5, 3.0):
        h = 1e-6 * z
        dv_fd = (v_of_z(k, z + h) - v_of_z(k, z - h)) / (2 * h)
        scale = abs(v_of_z(k, z)) + 2 * z + 1
        assert abs(ode27_residual_z(v_of_z(k, z), dv_fd, z)) < 1e-6 * scale
        assert abs(ode27_residual_z(v_of_z(k, z), dv_dz(k, z), z)) < 1e-10 * scale


@pytest.mark.parametrize("kappa", [-1.0, 0.0, 2.0])
def test_v_of_y_solves_linear_equation(kappa):
    for y in (-0.9, -0.2, 0.0, 0.4, 0.95):
        assert abs(ode27_residual_y(v_of_y(kappa, y), dv_dy(kappa, y), y)) < 1e-11


def test_integrated_v_matches_closed_form():
    pts = np.linspace(0.2, 0.9, 8)
    got = integrate_v(0.7, 0.2, 0.9, pts)
    want = [v_of_z(0.7, z) for z in pts]
    assert np.max(np.abs(got - want)) < 1e-10
    pts = np.linspace(-0.5, 0.5, 5)
    got = integrate_v(None, -0.5, 0.5, pts, kappa=0.3)
    assert np.max(np.abs(got - [v_of_y(0.3, y) for y in pts])) < 1e-10


def _fit(x, y):
    return np.polyfit(np.log(x), np.log(y), 1)[0]


def test_exponents_near_degenerate_locus():
    k = 0.8
    eps = np.geomspace(1e-10, 1e-8, 6)
    v = np.array([v_of_z(k, 1 - e) for e in eps])
    assert _fit(eps, v + 2) == pytest.approx(-0.25, abs=1e-3)
    assert (v[0] + 2) * eps[0] ** 0.25 == pytest.approx(2 ** 0.75 * k, rel=1e-2)
    # closer in, parametrised by s = (1 - z)^(1/4) to keep 1 - z exact
    params = SolutionParams(k=k)
    s = np.geomspace(1e-6, 1e-5, 6)
    f = np.array([f_at_s(params, x) for x in s])
    assert _fit(s**4, f) == pytest.approx(-0.5, abs=1e-3)
    v = np.array([v_at_s(params, x) for x in s])
    assert _fit(s**4, v + 2) == pytest.approx(-0.25, abs=1e-3)


def test_phase_field():
    assert phase_field(0.5, 2.0) == pytest.approx((0.75, 3.0))


def test_classify_branches():
    assert classify(SolutionParams(k=0.0, branch="B8")).branch == "B8"
    assert classify(SolutionParams(k=0.0)).branch == "A8"
    assert classify(SolutionParams(k=math.inf)).branch == "G2limit"
    one = classify(SolutionParams(k=1.0))
    assert one.branch == "B8minus"
    assert one.z0 == pytest.approx(bolt_z(1.0))
    assert v_of_z(1.0, one.z0) == pytest.approx(2.0, abs=1e-12)
    assert one.bolt_relation == pytest.approx(1.0, abs=1e-9)
    plus = classify(SolutionParams(kappa=0.5))
    assert plus.branch == "B8plus"
    assert v_of_y(0.5, plus.y0) == pytest.approx(2.0, abs=1e-12)
    assert classify(SolutionParams(kappa=-KAPPA_BAR - 0.1)).branch == "singular"


def test_params_validation():
    with pytest.raises(ValueError):
        SolutionParams()
    with pytest.raises(ValueError):
        SolutionParams(k=1.0, kappa=1.0)
    with pytest.raises(ValueError):
        SolutionParams(k=-1.0)
    with pytest.raises(ValueError):
        SolutionParams(k=1.0, f_norm=0.0)


def test_elementary_solutions_solve_third_order_equation():
    r = sp.symbols("r", positive=True)
    for kind in ("minus_r", "three_r", "quadratic"):
        f = elementary_f(kind, r)
        assert sp.simplify(ode19_residual(*f)) == 0
    assert q_factor(*elementary_f("minus_r", r)[:3]) == 8
    assert q_factor(*elementary_f("three_r", r)[:3]) == 0
    assert sp.simplify(q_factor(*elementary_f("quadratic", r)[:3]) - 2 * r**2) == 0


def test_quadratic_solution_exact_rationals():
    f = elementary_f("quadratic", Fraction(3), 1)
    assert f == (Fraction(15, 2), Fraction(4), Fraction(1), 0)
    assert ode19_residual(*f) == 0


def test_flat_a_squared():
    assert a_squared_from_f(*elementary_f("minus_r", 2.0)[:3]) == pytest.approx(-2.0)


def test_three_r_a_squared_solves_first_order_equation():
    r, rs = sp.symbols("r r_s", positive=True)
    a2 = sp.Rational(3, 5) * r * (1 - (rs / r) ** sp.Rational(5, 3))
    assert sp.simplify(sp.diff(a2, r) - (1 - 2 * a2 / (3 * r))) == 0
    assert three_r_a_squared(8.0, 1.0) == pytest.approx(float(a2.subs({r: 8, rs: 1})))


@pytest.mark.parametrize("k,z", [(0.5, 0.999), (1.0, 0.99), (2.0, 0.9)])
def test_triad_from_z_is_ricci_flat_flow(k, z):
    params = SolutionParams(k=k)
    assert v_of_z(k, z) > 2
    tri = triad_from_z(params, z)
    assert ricci_flat_residual(tri) < 1e-8
    assert np.allclose(tri.first, flow_rhs(*tri.values), rtol=1e-8, atol=1e-10)
    co = metric_from_zv(params, z)
    a, b, c = tri.values
    assert 4 * a * a == pytest.approx(co.coef_R12, rel=1e-10)
    assert 4 * b * b == pytest.approx(co.coef_R3, rel=1e-10)
    assert c * c == pytest.approx(co.coef_S4, rel=1e-10)


def test_large_k_limit_values():
    co = large_k_limit(0.5)
    one = 0.75
    assert co.coef_R12 == pytest.approx(2.0 / math.sqrt(one))
    assert co.coef_R3 == 4.0
    assert co.coef_S4 == pytest.approx(math.sqrt(3.0))


def test_v_of_z_domain():
    with pytest.raises(SolutionDomainError):
        v_of_z(1.0, 0.0)
    with pytest.raises(SolutionDomainError):
        v_of_z(1.0, 1.0)
    with pytest.raises(SolutionDomainError):
        v_of_y(0.0, 1.0)
