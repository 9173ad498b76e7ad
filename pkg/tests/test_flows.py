import itertools

import numpy as np
import pytest

import isoflow as iso
from isoflow import flows
from isoflow import matrixcore as mc
from isoflow import quantization as q


@pytest.fixture(scope="module")
def lap12():
    return q.band_coefficients(q.build_generators(12))


def rand_sym(rng, n):
    X = rng.standard_normal((n, n))
    return (X + X.T) / 2.0


def all_specs(n, lap):
    d = flows.potential_diagonal(n)
    return {
        "toda": flows.FlowSpec(kind="toda", potential=d),
        "ipm": flows.FlowSpec(kind="ipm", potential=d, laplacian=lap),
        "diagflow": flows.FlowSpec(kind="diagflow", laplacian=lap),
    }


# ---------------------------------------------------------------- potential

def test_potential_endpoints_and_midpoint():
    assert np.array_equal(flows.potential_diagonal(2), [-1.0, 1.0])
    assert np.array_equal(flows.potential_diagonal(3), [-1.0, 0.0, 1.0])


def test_potential_256_step():
    d = flows.potential_diagonal(256)
    assert np.allclose(np.diff(d), 2.0 / 255.0, atol=1e-15)
    assert d[0] == -1.0 and d[-1] == 1.0


def test_potential_rejects_small_n():
    with pytest.raises(ValueError):
        flows.potential_diagonal(1)


# ---------------------------------------------------------------- rhs

def test_toda_fixed_point_and_hand_example():
    d = np.array([-1.0, 1.0])
    assert np.allclose(flows.toda_rhs(np.diag([3.0, -2.0]), d), 0.0)
    L = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(flows.toda_rhs(L, d), np.diag([-4.0, 4.0]), atol=1e-14)


def test_toda_traceless_symmetric():
    rng = np.random.default_rng(0)
    d = flows.potential_diagonal(9)
    for _ in range(10):
        out = flows.toda_rhs(rand_sym(rng, 9), d)
        assert abs(np.trace(out)) <= 1e-12
        assert np.allclose(out, out.T, atol=1e-13 * np.linalg.norm(out))


def test_ipm_hand_example():
    lap = q.band_coefficients(q.build_generators(2))
    L = np.array([[0.0, 1.0], [1.0, 0.0]])
    d = np.array([-1.0, 1.0])
    assert np.allclose(flows.ipm_rhs(L, d, lap), np.diag([-2.0, 2.0]), atol=1e-14)


def test_ipm_fixed_point_and_monotone(lap12):
    rng = np.random.default_rng(1)
    d = flows.potential_diagonal(12)
    assert np.allclose(flows.ipm_rhs(np.diag(rng.standard_normal(12)), d, lap12), 0.0, atol=1e-13)
    for _ in range(200):
        L = rand_sym(rng, 12)
        out = flows.ipm_rhs(L, d, lap12)
        assert mc.frobenius_inner(np.diag(d), out) >= -1e-12 * np.linalg.norm(L) ** 2


def test_diagflow_fixed_points_and_monotone(lap12):
    rng = np.random.default_rng(2)
    assert np.allclose(flows.diagflow_rhs(np.diag(rng.standard_normal(12)), lap12), 0.0, atol=1e-13)
    for _ in range(200):
        L = rand_sym(rng, 12)
        out = flows.diagflow_rhs(L, lap12)
        assert mc.frobenius_inner(np.diag(np.diag(L)), out) >= -1e-12 * np.linalg.norm(L) ** 2


def test_diagflow_zero_diagonal_is_critical():
    lap = q.band_coefficients(q.build_generators(2))
    L = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(flows.diagflow_rhs(L, lap), 0.0, atol=1e-14)


# ---------------------------------------------------------------- generator

def test_generator_consistency_all_kinds(lap12):
    rng = np.random.default_rng(3)
    specs = all_specs(12, lap12)
    d = flows.potential_diagonal(12)
    for _ in range(5):
        L = rand_sym(rng, 12)
        direct = {
            "toda": flows.toda_rhs(L, d),
            "ipm": flows.ipm_rhs(L, d, lap12),
            "diagflow": flows.diagflow_rhs(L, lap12),
        }
        for kind, spec in specs.items():
            B = flows.generator(L, spec)
            assert np.allclose(B, -B.T, atol=1e-12)
            assert abs(np.trace(B)) <= 1e-12
            assert np.array_equal(mc.commutator(B, L), flows.rhs(L, spec))
            assert np.allclose(flows.rhs(L, spec), direct[kind], atol=1e-13)


def test_generator_diagonal_state_vanishes(lap12):
    L = np.diag(np.linspace(-2.0, 2.0, 12))
    for spec in all_specs(12, lap12).values():
        assert np.allclose(flows.generator(L, spec), 0.0, atol=1e-13)


def test_generator_qr_kind_rejected():
    spec = flows.FlowSpec(kind="qr")
    with pytest.raises(ValueError):
        flows.generator(np.eye(3), spec)


def test_flowspec_validation(lap12):
    with pytest.raises(ValueError):
        flows.FlowSpec(kind="toda")  # missing potential
    with pytest.raises(ValueError):
        flows.FlowSpec(kind="ipm", potential=np.zeros(3))  # missing laplacian
    with pytest.raises(ValueError):
        flows.FlowSpec(kind="nope")


def test_vector_field_isospectral(lap12):
    # d/dt trace(L^k) = k trace(L^(k-1) [B, L]) = 0 for k = 2, 3, 4
    rng = np.random.default_rng(4)
    for spec in all_specs(12, lap12).values():
        L = rand_sym(rng, 12)
        R = flows.rhs(L, spec)
        P = L.copy()
        for k in (2, 3, 4):
            val = k * np.trace(np.linalg.matrix_power(L, k - 1) @ R)
            scale = max(np.linalg.norm(L) ** k, 1.0)
            assert abs(val) <= 1e-11 * scale


# ---------------------------------------------------------------- lyapunov

def test_lyapunov_permutation_maximum(lap12):
    # trace(D L) over diagonal reorderings is maximal for the ascending order
    rng = np.random.default_rng(5)
    for n in (3, 4, 5):
        d = flows.potential_diagonal(n)
        spec = flows.FlowSpec(kind="toda", potential=d)
        vals = np.sort(rng.standard_normal(n))
        best = max(
            float(np.sum(d * np.asarray(p))) for p in itertools.permutations(vals)
        )
        assert flows.lyapunov(np.diag(vals), spec) == pytest.approx(best, abs=1e-12)


def test_lyapunov_diagflow_diagonal_energy(lap12):
    spec = flows.FlowSpec(kind="diagflow", laplacian=lap12)
    vals = np.linspace(-2.0, 3.0, 12)
    L = np.diag(vals)
    assert flows.lyapunov(L, spec) == pytest.approx(0.5 * np.sum(vals**2), rel=1e-14)
    assert flows.lyapunov(np.zeros((12, 12)), spec) == 0.0


# ---------------------------------------------------------------- qr step

def test_qr_step_diagonal_unchanged():
    L = np.diag([2.0, -1.0, 0.5])
    assert np.allclose(flows.qr_step(L, 0.7), L, atol=1e-13)


def test_qr_step_isospectral():
    rng = np.random.default_rng(6)
    L = rand_sym(rng, 16)
    ref = mc.jacobi_spectrum(L).eigenvalues
    out = flows.qr_step(L, 0.3)
    new = mc.jacobi_spectrum(out).eigenvalues
    assert np.max(np.abs(new - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_qr_step_preserves_tridiagonal():
    from isoflow.cli import random_tridiagonal

    L = random_tridiagonal(8, 5)
    out = flows.qr_step(L, 0.5)
    mask = np.abs(np.subtract.outer(np.arange(8), np.arange(8))) > 1
    assert np.max(np.abs(out[mask])) <= 1e-12


def test_qr_step_matches_negative_toda_rhs():
    # frozen sign convention: (qr_step(L, h) - L)/h -> -toda_rhs(L, diag(1..n))
    from isoflow.cli import random_tridiagonal

    n = 6
    L = random_tridiagonal(n, 3)
    D = np.arange(1.0, n + 1)
    h = 1e-4
    diff = (flows.qr_step(L, h) - L) / h
    target = -flows.toda_rhs(L, D)
    assert np.linalg.norm(diff - target) <= 1e-4 * np.linalg.norm(target)
