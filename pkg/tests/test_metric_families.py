import math

import numpy as np
import pytest

from spin7.curvature import ricci_flat_residual
from spin7.gradient_flow import flow_rhs
from spin7.metric_families import (
    FAMILIES,
    FamilyDomainError,
    MetricFamily,
    bolt_expansion,
    interpolation_report,
    sample,
    triad_at_offset,
)


def test_A8_sample_values():
    s = sample(MetricFamily("A8"), 3.0)
    assert s.g_rr == pytest.approx(4 / 3)
    assert s.coef_R12 == pytest.approx(12.0)
    assert s.coef_R3 == pytest.approx(3.0)
    assert s.coef_S4 == pytest.approx(4.0)


def test_B8_sample_values():
    s = sample(MetricFamily("B8"), 3.0)
    assert s.coef_S4 == pytest.approx(4.0)
    assert s.coef_R12 == 0.0 and s.coef_R3 == 0.0
    assert math.isinf(s.g_rr) and s.triad is None


@pytest.mark.parametrize("ell", [1.0, 0.7])
def test_B8_is_A8_with_reversed_scale(ell):
    a8 = lambda r, l: (
        (r + l) ** 2 / ((r + 3 * l) * (r - l)),
        (r + 3 * l) * (r - l),
        4 * l * l * (r + 3 * l) * (r - l) / (r + l) ** 2,
        (r * r - l * l) / 2,
    )
    for r in (3.5 * ell, 5 * ell, 40 * ell):
        s = sample(MetricFamily("B8", scale=ell), r)
        assert (s.g_rr, s.coef_R12, s.coef_R3, s.coef_S4) == pytest.approx(a8(r, -ell), rel=1e-13)
        s = sample(MetricFamily("A8", scale=ell), r)
        assert (s.g_rr, s.coef_R12, s.coef_R3, s.coef_S4) == pytest.approx(a8(r, ell), rel=1e-13)


def test_bryant_salamon_and_G2_values():
    s = sample(MetricFamily("BryantSalamon"), 2.0)
    D = 1 - 2 ** (-10 / 3)
    assert s.g_rr == pytest.approx(1 / D)
    assert s.coef_R12 == pytest.approx(0.36 * 4 * D) and s.coef_R3 == s.coef_R12
    assert s.coef_S4 == pytest.approx(0.45 * 4)
    s = sample(MetricFamily("G2xS1", circle=0.25), 2.0)
    assert s.g_rr == pytest.approx(1 / (1 - 1 / 16))
    assert s.coef_R3 == pytest.approx(0.25)
    assert s.coef_S4 == pytest.approx(2.0)


def test_domain_errors():
    with pytest.raises(FamilyDomainError):
        sample(MetricFamily("B8"), 2.0)
    with pytest.raises(FamilyDomainError):
        triad_at_offset(MetricFamily("A8"), 0.0)
    with pytest.raises(ValueError):
        MetricFamily("C7")
    with pytest.raises(ValueError):
        MetricFamily("A8", scale=-1.0)


@pytest.mark.parametrize("family", ["A8", "B8", "BryantSalamon"])
def test_families_solve_flow_and_are_ricci_flat(family):
    fam = MetricFamily(family, scale=1.3)
    for x in (1e-3, 0.5, 4.0, 50.0):
        tri = triad_at_offset(fam, x)
        assert np.allclose(tri.first, flow_rhs(*tri.values), rtol=1e-10, atol=1e-12)
        assert ricci_flat_residual(tri) < 1e-8 * max(1.0, 1 / x)


def test_G2_product_is_ricci_flat_only_as_circle_shrinks():
    # the R3 circle is fibred, so Ricci ~ b^2 and flatness holds in the limit
    res = [ricci_flat_residual(triad_at_offset(MetricFamily("G2xS1", circle=b), 0.8)) for b in (1e-3, 1e-6, 1e-9)]
    assert res[1] / res[0] == pytest.approx(1e-6, rel=1e-3)
    assert res[2] < 1e-12


def test_signed_b():
    assert triad_at_offset(MetricFamily("A8"), 1.0).values[1] < 0
    assert triad_at_offset(MetricFamily("B8"), 1.0).values[1] > 0


def test_proper_distance():
    fam = MetricFamily("A8")
    assert fam.t_of_x(2.0) == pytest.approx(math.sqrt(12.0))
    bs = MetricFamily("BryantSalamon")
    from scipy.integrate import quad

    want, _ = quad(lambda r: 1 / math.sqrt(1 - r ** (-10 / 3)), 1.0, 2.0)
    assert bs.t_of_x(1.0) == pytest.approx(want, rel=1e-8)


@pytest.mark.parametrize("family", FAMILIES)
def test_bolts_are_smooth(family):
    rep = bolt_expansion(MetricFamily(family))
    assert rep.max_deviation() < 1e-3
    names = {f.name for f in rep.collapsing}
    if family == "A8":
        assert names == {"R12", "R3", "S4"} and rep.surviving == {}
    elif family == "G2xS1":
        assert rep.surviving["coef_S4"] > 0
    else:
        assert rep.surviving["coef_S4"] > 0 and "S4" not in names


@pytest.mark.parametrize("family", ["A8", "B8"])
def test_asymptotically_locally_conical(family):
    rep = interpolation_report(MetricFamily(family))
    assert rep["asymptotics"] == "ALC"
    assert rep["growth_exponent_R12"] == pytest.approx(1.0, abs=1e-3)
    assert rep["growth_exponent_S4"] == pytest.approx(1.0, abs=1e-3)
    assert rep["growth_exponent_R3"] == pytest.approx(0.0, abs=1e-3)
    assert rep["ratio_S4_over_R12_far"] == pytest.approx(0.5, rel=1e-3)
    assert rep["circle_coefficient_far"] == pytest.approx(4.0, rel=1e-3)
