import numpy as np
import pytest

from spin7.curvature import ricci_flat_residual
from spin7.gradient_flow import (
    FlowState,
    LagrangianData,
    euler_lagrange_residual,
    flow_rhs,
    flow_triad,
    gradient_flow_rhs,
    integrate_flow,
    q_relation_residual,
    scaled_solution,
    superpotential_check,
    trajectory_diagnostics,
    truncation_defect,
    truncation_report,
)
from spin7.metric_families import MetricFamily, triad_at_offset
from spin7.triad import SingularFrameError, TriadJet


def test_flow_rhs_values():
    assert flow_rhs(1.0, 1.0, 1.0) == pytest.approx((-0.5, -0.5, 1.5))
    assert flow_rhs(1.0, -1.0, 1.0) == pytest.approx((0.5, -0.5, 0.5))


def test_flow_rhs_rejects_singular_points():
    with pytest.raises(SingularFrameError):
        flow_rhs(0.0, 1.0, 1.0)
    with pytest.raises(SingularFrameError):
        integrate_flow(FlowState(0.0, 1.0, 0.5, 0.0), 1.0)


@pytest.mark.parametrize("family", ["BryantSalamon", "A8", "B8"])
def test_closed_form_triads_solve_flow(family):
    fam = MetricFamily(family)
    tri = triad_at_offset(fam, fam.scale)  # r = 2 r0 for the Bryant-Salamon metric
    assert np.allclose(tri.first, flow_rhs(*tri.values), atol=1e-12)


def test_integration_reproduces_A8():
    fam = MetricFamily("A8")
    start = triad_at_offset(fam, 1.0)  # r = 2
    end = triad_at_offset(fam, 4.0)  # r = 5
    t_end = fam.t_of_x(4.0)
    traj = integrate_flow(FlowState(fam.t_of_x(1.0), *start.values), t_end, tol=1e-12)
    assert traj.status == "ok"
    assert traj.t[-1] == pytest.approx(t_end)
    got = np.array([traj.a[-1], traj.b[-1], traj.c[-1]])
    assert np.max(np.abs(got - np.array(end.values))) < 1e-7


def test_trajectory_diagnostics_vanish_along_flow():
    traj = integrate_flow(FlowState(0.0, 1.0, 0.3, 1.2), 5.0)
    ric, el, tv = trajectory_diagnostics(traj)
    assert ric.max() < 1e-9 and el.max() < 1e-9 and tv.max() < 1e-9


def test_a_equals_b_truncation_preserved():
    assert truncation_report("a_eq_b").consistent
    traj = integrate_flow(FlowState(0.0, 0.8, 0.8, 1.3), 4.0)
    assert np.max(np.abs(traj.a - traj.b)) < 1e-9
    assert truncation_defect("a_eq_b", 0.7, 0.7, 1.9) == 0.0


def test_truncation_reports():
    assert truncation_report("b_to_zero").consistent
    assert truncation_defect("b_to_zero", 1.3, 0.0, 0.7) == 0.0
    flat = truncation_report("b_eq_minus_a")
    assert flat.consistent and "a^2 = c^2" in flat.note
    assert truncation_defect("b_eq_minus_a", 1.0, -1.0, 1.0) == 0.0
    assert truncation_defect("b_eq_minus_a", 1.0, -1.0, 2.0) != 0.0
    rep = truncation_report("a_eq_c")
    assert not rep.consistent and rep.reduced_rhs is None
    assert truncation_defect("a_eq_c", 1.0, 0.5, 1.0) == pytest.approx(-1.5)
    with pytest.raises(ValueError):
        truncation_report("nonsense")


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_scale_covariance(lam):
    traj = integrate_flow(FlowState(0.0, 1.0, 0.3, 1.2), 3.0, tol=1e-12)
    scaled = scaled_solution(traj, lam)
    direct = integrate_flow(FlowState(0.0, lam * 1.0, lam * 0.3, lam * 1.2), lam * 3.0, tol=1e-12)
    assert direct.a[-1] == pytest.approx(scaled.a[-1], rel=1e-8)
    assert direct.b[-1] == pytest.approx(scaled.b[-1], rel=1e-8)
    assert direct.c[-1] == pytest.approx(scaled.c[-1], rel=1e-8)


def test_q_relation_along_flow():
    tri = flow_triad(1.0, 0.3, 1.2, order=4)
    res19, resq = q_relation_residual(tri)
    assert res19 < 1e-10 and resq < 1e-10


def test_gradient_of_superpotential_matches_flow(rng):
    for _ in range(50):
        a, c = rng.uniform(0.3, 3, 2)
        b = rng.uniform(-3, 3)
        assert np.allclose(gradient_flow_rhs(a, b, c), flow_rhs(a, b, c), atol=1e-12, rtol=1e-12)


def test_superpotential_identity_random(rng):
    for alpha, beta, gamma in rng.uniform(-1.0, 1.0, (50, 3)):
        point = LagrangianData(alpha, beta, gamma)
        assert superpotential_check(point) < 1e-10 * abs(point.V)


def test_euler_lagrange_detects_non_solutions(rng):
    tri = TriadJet.from_values(rng.uniform(0.5, 2, 3), rng.normal(size=3), rng.normal(size=3))
    assert euler_lagrange_residual(tri) > 1e-3
    assert euler_lagrange_residual(flow_triad(1.0, 0.3, 1.2)) < 1e-12
    assert ricci_flat_residual(flow_triad(0.6, -0.2, 0.9)) < 1e-9
