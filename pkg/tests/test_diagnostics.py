import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoflow import diagnostics as dg
from isoflow import flows, integrators
from isoflow import matrixcore as mc
from isoflow import quantization as q
from isoflow.cli import random_tridiagonal


@pytest.fixture(scope="module")
def lap16():
    return q.band_coefficients(q.build_generators(16))


def rand_sym(rng, n):
    X = rng.standard_normal((n, n))
    return (X + X.T) / 2.0


# ---------------------------------------------------------------- offdiag

def test_offdiag_examples():
    assert dg.offdiag_norm(np.diag([1.0, -2.0, 3.0])) == 0.0
    assert dg.offdiag_norm(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(np.sqrt(2.0))


# ---------------------------------------------------------------- inversions

def test_inversion_examples():
    assert dg.inversion_count([1.0, 2.0, 3.0]) == 0
    assert dg.inversion_count([3.0, 2.0, 1.0]) == 3
    assert dg.inversion_count([2.0, 1.0, 3.0]) == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(min_value=-50, max_value=50), min_size=0, max_size=30))
def test_inversion_matches_bruteforce(vals):
    brute = sum(
        1 for i in range(len(vals)) for j in range(i + 1, len(vals)) if vals[i] > vals[j]
    )
    assert dg.inversion_count(np.asarray(vals, dtype=float)) == brute


def test_inversion_range():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(20)
    assert 0 <= dg.inversion_count(v) <= 20 * 19 // 2


# ---------------------------------------------------------------- drift

def test_spectral_drift_self_and_conjugation():
    rng = np.random.default_rng(1)
    L = rand_sym(rng, 12)
    ref = mc.jacobi_spectrum(L)
    assert dg.spectral_drift(L, ref) <= 1e-12
    Q, _ = mc.householder_qr(rng.standard_normal((12, 12)) + np.eye(12))
    assert dg.spectral_drift(Q.T @ L @ Q, ref) <= 1e-12


def test_spectral_drift_positive_after_crude_rk4():
    L0 = random_tridiagonal(8, 2)
    spec = flows.FlowSpec(kind="toda", potential=flows.potential_diagonal(8))
    ref = mc.jacobi_spectrum(L0)
    L1 = integrators.rk4_step(L0, lambda X: flows.rhs(X, spec), 2.0)
    assert dg.spectral_drift(L1, ref) > 0


# ---------------------------------------------------------------- traces

def test_conserved_traces_examples():
    assert dg.conserved_traces(np.diag([-1.0, 1.0]), 2)[0] == pytest.approx(1.0)
    assert np.array_equal(dg.conserved_traces(np.zeros((3, 3)), 4), np.zeros(3))


def test_conserved_traces_conjugation_invariant():
    rng = np.random.default_rng(2)
    L = rand_sym(rng, 10)
    Q, _ = mc.householder_qr(rng.standard_normal((10, 10)) + np.eye(10))
    a = dg.conserved_traces(L, 4)
    b = dg.conserved_traces(Q.T @ L @ Q, 4)
    assert np.max(np.abs(a - b)) <= 1e-12 * max(np.max(np.abs(a)), 1.0)


def test_conserved_traces_validation():
    with pytest.raises(ValueError):
        dg.conserved_traces(np.eye(2), 1)


# ---------------------------------------------------------------- orthogonality

def test_orthogonality_identity_inertia():
    rng = np.random.default_rng(3)
    spec = flows.FlowSpec(kind="toda", potential=flows.potential_diagonal(8))
    for _ in range(50):
        r = dg.orthogonality_residual(rand_sym(rng, 8), spec)
        assert r is not None and r <= 1e-12


def test_orthogonality_laplacian_inertia(lap16):
    rng = np.random.default_rng(4)
    spec = flows.FlowSpec(kind="ipm", potential=flows.potential_diagonal(16),
                          laplacian=lap16)
    for _ in range(50):
        r = dg.orthogonality_residual(rand_sym(rng, 16), spec)
        assert r is not None and r <= 1e-11


def test_orthogonality_not_applicable_for_diagonal(lap16):
    spec = flows.FlowSpec(kind="ipm", potential=flows.potential_diagonal(16),
                          laplacian=lap16)
    assert dg.orthogonality_residual(np.diag(np.arange(16.0)), spec) is None


# ---------------------------------------------------------------- contraction

def test_contraction_stationary_slack_zero(lap16):
    spec = flows.FlowSpec(kind="ipm", potential=flows.potential_diagonal(16),
                          laplacian=lap16)
    L0 = np.diag(np.linspace(-1.0, 1.0, 16))
    cfg = integrators.IntegratorConfig(h=10.0, steps=5, record_every=1)
    traj = integrators.run_flow(L0, spec, cfg)
    assert dg.contraction_check(traj, spec) == pytest.approx(0.0, abs=1e-14)


def test_contraction_ipm_random_start(lap16):
    rng = np.random.default_rng(5)
    L0 = rand_sym(rng, 16)
    spec = flows.FlowSpec(kind="ipm", potential=flows.potential_diagonal(16),
                          laplacian=lap16)
    cfg = integrators.IntegratorConfig(h=0.25, steps=960, record_every=1,
                                       fp_tol=1e-12, fp_maxit=300)
    traj = integrators.run_flow(L0, spec, cfg)
    slack = dg.contraction_check(traj, spec)
    assert slack >= -1e-6 * np.linalg.norm(L0) ** 2


def test_contraction_stride_refinement_converges_from_below(lap16):
    rng = np.random.default_rng(6)
    L0 = 3.0 * rand_sym(rng, 12)
    lap12 = q.band_coefficients(q.build_generators(12))
    spec = flows.FlowSpec(kind="ipm", potential=flows.potential_diagonal(12),
                          laplacian=lap12)
    finals = []
    for stride in (64, 16, 1):
        cfg = integrators.IntegratorConfig(h=0.05, steps=1280, record_every=stride,
                                           fp_tol=1e-13, fp_maxit=300)
        traj = integrators.run_flow(L0, spec, cfg)
        _, slacks = dg.contraction_slack_series(traj, spec)
        finals.append(slacks[-1])
    # quadrature refinement converges: each 4x stride cut shrinks the
    # remaining final-time slack error
    assert abs(finals[1] - finals[2]) <= 0.5 * abs(finals[0] - finals[2])


def test_contraction_flags_nonmonotone_energy():
    spec = flows.FlowSpec(kind="toda", potential=flows.potential_diagonal(4))
    good = np.diag([-1.0, -0.5, 0.5, 1.0])
    worse = np.diag([1.0, 0.5, -0.5, -1.0])  # lower trace(DL): energy rose
    traj = integrators.Trajectory(
        times=np.array([0.0, 1.0]), snapshots=[good, worse], records=[]
    )
    with pytest.raises(RuntimeError):
        dg.contraction_check(traj, spec)


def test_contraction_toda(lap16):
    L0 = random_tridiagonal(16, 4)
    spec = flows.FlowSpec(kind="toda", potential=flows.potential_diagonal(16))
    cfg = integrators.IntegratorConfig(h=0.05, steps=200, record_every=1)
    traj = integrators.run_flow(L0, spec, cfg)
    assert dg.contraction_check(traj, spec) >= -1e-6 * np.linalg.norm(L0) ** 2
