import warnings
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from spin7.harmonic_forms import (
    CAYLEY,
    SUPPORTED,
    HarmonicTriple,
    NotNormalisableError,
    closed_form_u,
    closure_defect,
    closure_residuals,
    derived_rhs,
    duality_eigenvalue,
    frame_norm_squared,
    harmonic_rhs,
    l2_integral,
    linear_relation,
    match_closed_form,
    measure_calibration,
    norm_squared,
    potential_residual,
    quoted_norm_squared,
    tail_exponents,
    triple_on_metric,
)
from spin7.gradient_flow import flow_triad
from spin7.metric_families import MetricFamily, triad_at_offset

F = Fraction


@pytest.mark.parametrize("family,label,r,want", [
    ("A8", -1, 1, (F(1, 16), F(-3, 64), F(-1, 128))),
    ("B8", -1, 3, (F(15, 128), F(-5, 256), F(5, 256))),
    ("B8", 1, 3, (F(-3, 32), F(0), F(0))),
])
def test_closed_form_values_at_bolt(family, label, r, want):
    assert closed_form_u(family, label, F(r)).values == want


@pytest.mark.parametrize("family,label,r,want", [
    ("A8", -1, 1, F(105, 256)),
    ("B8", -1, 3, F(1575, 2048)),
    ("B8", 1, 3, F(27, 64)),
])
def test_norms_at_bolt(family, label, r, want):
    assert norm_squared(closed_form_u(family, label, F(r))) == want
    assert quoted_norm_squared(family, label, F(r)) == want


@pytest.mark.parametrize("family,label", SUPPORTED)
def test_norm_formula_exact_at_rational_points(family, label):
    r0 = MetricFamily(family).r_bolt
    for k in range(50):
        r = F(int(r0)) + F(k + 1, 7)
        assert norm_squared(closed_form_u(family, label, r)) == quoted_norm_squared(family, label, r)


def test_norm_from_components_matches_formula():
    u = HarmonicTriple(0.3, -0.7, 1.1, -1)
    assert frame_norm_squared(u) == pytest.approx(norm_squared(u))


@pytest.mark.parametrize("family,label", SUPPORTED)
@pytest.mark.parametrize("x", [0.05, 0.8, 6.0])
def test_closed_forms_are_closed(family, label, x):
    trip, triad = triple_on_metric(family, label, x)
    scale = max(abs(float(v.value)) for v in trip.values)
    assert closure_defect(trip, triad) < 1e-10 * scale * 100
    assert np.max(np.abs(closure_residuals(trip, triad))) < 1e-11 * max(1.0, x) ** 4
    assert duality_eigenvalue(trip, triad) == trip.duality
    assert trip.duality == -label


@pytest.mark.parametrize("family,label", SUPPORTED)
def test_closed_with_printed_label_fails(family, label):
    trip, triad = triple_on_metric(family, label, 0.8)
    flipped = HarmonicTriple(*trip.values, label)
    assert closure_defect(flipped, triad) > 1e-4


def test_cayley_triple_is_closed_along_flow():
    triad = flow_triad(0.9, -0.4, 1.3)
    assert np.allclose(harmonic_rhs(CAYLEY, triad), 0.0, atol=1e-12)


def test_derived_system_matches_hand_written(rng):
    triad = triad_at_offset(MetricFamily("B8"), 1.2)
    for s in (1, -1):
        u = rng.normal(size=3)
        sol, rank = derived_rhs(*u, s, triad)
        assert rank == 3
        assert np.allclose(sol, harmonic_rhs(HarmonicTriple(*u, s), triad), atol=1e-10)


def test_zero_triple_is_fixed():
    triad = triad_at_offset(MetricFamily("A8"), 1.0)
    assert harmonic_rhs(HarmonicTriple(0.0, 0.0, 0.0, 1), triad) == (0.0, 0.0, 0.0)


def test_linear_relations():
    for family, label in (("A8", -1), ("B8", -1)):
        rank, rel = linear_relation(family, label)
        assert rank == 2
        assert [sp.nsimplify(v) for v in rel] == [sp.Rational(-1, 4), sp.Rational(-1, 2), 1]
    assert linear_relation("B8", 1) == (3, None)
    r = sp.symbols("r", positive=True)
    for family, label in (("A8", -1), ("B8", -1)):
        u1, u2, u3 = closed_form_u(family, label, r).values
        assert sp.simplify(u1 + 2 * u2 - 4 * u3) == 0


@pytest.mark.parametrize("family,label", SUPPORTED)
def test_l2_integrals(family, label):
    rep = l2_integral(family, label)
    assert rep.value == pytest.approx(float(rep.quoted), rel=1e-10)
    assert rep.duality == -label


def test_integrals_ratio_and_calibration():
    vals = {key: l2_integral(*key).value for key in SUPPORTED}
    assert vals[("B8", 1)] / vals[("B8", -1)] == pytest.approx(4.0, rel=1e-10)
    assert measure_calibration() == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("family,label", SUPPORTED)
def test_numerical_integration_reproduces_closed_forms(family, label):
    assert match_closed_form(family, label) < 1e-7


def test_A8_plus_is_not_normalisable():
    with pytest.raises(NotNormalisableError):
        closed_form_u("A8", 1, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        # every solution closing with this sign decays too slowly for an L^2 tail
        assert tail_exponents("A8", -1).min() > -1
        # the other sign has a square-integrable direction
        assert tail_exponents("A8", 1).min() < -1


def test_potential_closes_onto_A8_form():
    for x in (0.01, 0.5, 3.0):
        gap, size = potential_residual(x)
        assert gap < 1e-12 * max(size, 1.0)


def test_potential_norm_vanishing_orders():
    from spin7.harmonic_forms import potential_norm_squared

    fam = MetricFamily("A8")
    xs = np.geomspace(1e-6, 1e-4, 5)
    b2 = np.array([potential_norm_squared(x) for x in xs])
    rho = np.array([fam.t_of_x(x) for x in xs])
    assert np.polyfit(np.log(xs), np.log(b2), 1)[0] == pytest.approx(1.0, abs=1e-3)
    assert np.polyfit(np.log(rho), np.log(b2), 1)[0] == pytest.approx(2.0, abs=1e-3)
