import numpy as np
import pytest

from spin7.curvature import connection, curvature, ricci_flat_residual, torsion_residual
from spin7.gradient_flow import flow_triad
from spin7.metric_families import MetricFamily, triad_at_offset
from spin7.triad import TriadJet


def flat_triad():
    # a = -b = c = t/2 at t = 2
    return TriadJet.from_values((1.0, -1.0, 1.0), (0.5, -0.5, 0.5), (0.0, 0.0, 0.0))


def test_flat_space_is_ricci_flat():
    assert ricci_flat_residual(flat_triad()) < 1e-11


@pytest.mark.parametrize("family,r", [("A8", 3.0), ("B8", 5.0)])
def test_closed_form_metrics_are_ricci_flat(family, r):
    fam = MetricFamily(family)
    assert ricci_flat_residual(triad_at_offset(fam, r - fam.r_bolt)) < 1e-9


def test_flow_triad_is_ricci_flat():
    assert ricci_flat_residual(flow_triad(1.0, 0.3, 1.2)) < 1e-9


def test_random_triad_is_not_ricci_flat(rng):
    for _ in range(5):
        vals = rng.uniform(0.5, 2.0, 3)
        tri = TriadJet.from_values(vals, rng.normal(size=3), rng.normal(size=3))
        assert ricci_flat_residual(tri) > 0.01


def test_perturbing_a_derivative_breaks_ricci_flatness():
    tri = flow_triad(1.0, 0.3, 1.2)
    vals = tri.values
    firsts = list(tri.first)
    firsts[0] += 1e-3
    seconds = [float(j.derivative().derivative().value) for j in (tri.a, tri.b, tri.c)]
    bumped = TriadJet.from_values(vals, firsts, seconds)
    assert ricci_flat_residual(bumped) > 1e-5


def test_connection_radial_component():
    tri = TriadJet.from_values((1.1, 0.4, 0.8), (0.3, -0.2, 0.7))
    table = connection(tri)
    # omega_{07|0} = c'/c
    assert table.frame[0, 7, 0] == pytest.approx(0.7 / 0.8)
    assert np.allclose(table.frame, -np.transpose(table.frame, (1, 0, 2)))


def test_torsion_free(rng):
    for _ in range(5):
        tri = TriadJet.from_values(rng.uniform(0.5, 2, 3), rng.normal(size=3), rng.normal(size=3))
        assert torsion_residual(connection(tri)) < 1e-12


def test_curvature_symmetries_and_no_internal_leak(rng):
    tri = TriadJet.from_values(rng.uniform(0.5, 2, 3), rng.normal(size=3), rng.normal(size=3))
    cur = curvature(tri)
    R = cur.riemann
    assert cur.bianchi_residual() < 1e-10
    assert np.allclose(R, -np.transpose(R, (1, 0, 2, 3)))
    assert np.allclose(R, -np.transpose(R, (0, 1, 3, 2)))
    assert np.allclose(R, np.transpose(R, (2, 3, 0, 1)))
    assert cur.internal_leak < 1e-12
    assert np.allclose(cur.ricci, cur.ricci.T)
