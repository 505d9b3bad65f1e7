import itertools

import numpy as np
import pytest

from spin7.gradient_flow import flow_rhs, flow_triad
from spin7.metric_families import MetricFamily, triad_at_offset
from spin7.spinor_calibration import (
    DIM,
    annihilation_residuals,
    build_clifford,
    calibration_check,
    calibration_sweep,
    cayley_components,
    cayley_full_tensor,
    chirality_sign,
    closure_residual,
    flow_from_closure,
    internal_operators,
    j_coupling_matrix,
    parallel_spinor,
    projector_kernel,
    rotation_defect,
    self_duality_defect,
    stabilizer_algebra,
)
from spin7.triad import TriadJet


def test_clifford_relations():
    cl = build_clifford()
    assert cl.anticommutator_defect() == 0
    for g in cl.gammas:
        assert np.array_equal(g, g.T)
        assert np.trace(g) == 0
    chi = cl.chirality
    assert np.array_equal(chi @ chi, np.eye(DIM, dtype=np.int64))
    assert np.trace(chi) == 0


def test_projector_kernel_is_a_line():
    assert len(projector_kernel()) == 1
    eta = parallel_spinor()
    assert np.linalg.norm(eta) == pytest.approx(1.0)
    assert chirality_sign(eta) == -1


@pytest.mark.parametrize("family", ["A8", "B8", "BryantSalamon"])
def test_spinor_is_parallel_on_closed_form_metrics(family):
    tri = triad_at_offset(MetricFamily(family), 0.7)
    assert np.max(annihilation_residuals(tri)) < 1e-12


def test_spinor_is_parallel_along_flow():
    assert np.max(annihilation_residuals(flow_triad(0.9, -0.4, 1.3))) < 1e-12


def test_internal_connection_preserves_spinor():
    tri = flow_triad(0.9, -0.4, 1.3)
    ops = internal_operators(tri)
    assert ops
    eta = parallel_spinor()
    for op in ops.values():
        assert np.max(np.abs(op @ eta)) < 1e-14


def test_parallelism_is_sensitive_to_derivatives():
    a, b, c = 0.9, -0.4, 1.3
    rates = list(flow_rhs(a, b, c))
    rates[2] += 1e-3
    tri = TriadJet.from_values((a, b, c), rates, (0.0, 0.0, 0.0))
    assert np.max(annihilation_residuals(tri)) > 1e-4


def test_cayley_components():
    comps = cayley_components()
    assert len(comps) == 14
    assert comps[(0, 1, 2, 3)] == -1.0
    assert comps[(4, 5, 6, 7)] == 1.0
    assert set(np.abs(list(comps.values()))) == {1.0}
    assert self_duality_defect() < 1e-12


def test_j_coupling_fit_is_exact():
    X, resid = j_coupling_matrix()
    assert resid < 1e-12
    want = np.zeros((3, 6))
    # pairs (4,5) (4,6) (4,7) (5,6) (5,7) (6,7)
    want[0, 3], want[0, 2] = 1, -1
    want[1, 1], want[1, 4] = -1, -1
    want[2, 0], want[2, 5] = 1, -1
    assert np.allclose(X, want)


def test_cayley_form_closed_iff_flow():
    assert closure_residual(flow_triad(0.9, -0.4, 1.3)) < 1e-12
    tri = TriadJet.from_values((0.9, -0.4, 1.3), (0.1, 0.2, 0.3), (0.0, 0.0, 0.0))
    assert closure_residual(tri) > 1e-3


def test_closure_determines_flow(rng):
    for a, b, c in rng.uniform(0.4, 2.0, (5, 3)):
        sol, rank = flow_from_closure(a, -b, c)
        assert rank == 3
        assert np.allclose(sol, flow_rhs(a, -b, c), atol=1e-12)


def test_calibration_bound():
    vals = calibration_sweep(20_000, seed=3)
    assert vals.max() <= 1 + 1e-12
    T = cayley_full_tensor()
    eye = np.eye(8)
    for key in itertools.combinations(range(8), 4):
        v = calibration_check(eye[list(key)], T)
        assert v == pytest.approx(1.0 if key in cayley_components() else 0.0, abs=1e-14)


def test_stabilizer_is_spin7():
    basis = stabilizer_algebra()
    assert basis.shape == (21, 28)
    for gen in basis:
        assert rotation_defect(gen) < 1e-12
    generic = np.zeros(28)
    generic[0] = 1.0  # rotation in the (0, 1) plane
    assert rotation_defect(generic) > 0.1
