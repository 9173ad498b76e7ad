"""Measured quantities and numerical verdicts for the geometric claims.

Sortedness is measured as an inversion count (a permutation metric, robust
near degenerate eigenvalues).  The contraction check tests the pathlength
bound P(t)^2 <= t (E(0) - E(t)) with E the negated Lyapunov functional,
which is the form of the distance inequality that is exactly true.
"""

from dataclasses import dataclass

import numpy as np

from . import flows
from .matrixcore import commutator, frobenius_inner


@dataclass(frozen=True)
class DiagnosticsRecord:
    step: int
    time: float
    offdiag_norm: float
    inversions: int
    lyapunov: float
    spectral_drift: float
    traces: tuple  # (I2, I3, I4)
    traced_diagonals: tuple


def offdiag_norm(L):
    """Frobenius norm of L minus its diagonal part."""
    L = np.asarray(L, dtype=float)
    return float(np.sqrt(np.sum(L**2) - np.sum(np.diag(L) ** 2)))


def inversion_count(diag):
    """Number of pairs i < j with diag_i > diag_j."""
    v = np.asarray(diag, dtype=float)
    gt = v[:, None] > v[None, :]
    return int(np.sum(np.triu(gt, 1)))


def spectral_drift(L, ref):
    """Max sorted-eigenvalue discrepancy against a reference spectrum,
    normalized by the reference spectral radius.

    The current spectrum comes from the LAPACK eigensolver, the reference
    from the Jacobi oracle, so the comparison crosses two independent
    implementations.
    """
    L = np.asarray(L, dtype=float)
    w = np.linalg.eigvalsh((L + L.T) / 2.0)
    gap = float(np.max(np.abs(w - ref.eigenvalues)))
    radius = float(np.max(np.abs(ref.eigenvalues)))
    if radius == 0.0:
        return gap
    return gap / radius


def conserved_traces(L, kmax):
    """The first integrals trace(L^k)/k for k = 2..kmax."""
    if kmax < 2:
        raise ValueError("kmax must be at least 2")
    L = np.asarray(L, dtype=float)
    out = []
    P = L @ L
    for k in range(2, kmax + 1):
        out.append(float(np.trace(P)) / k)
        if k < kmax:
            P = P @ L
    return np.asarray(out)


def make_record(step, time, L, spec, ref, traced):
    d = np.diag(L)
    i2, i3, i4 = conserved_traces(L, 4)
    return DiagnosticsRecord(
        step=step,
        time=time,
        offdiag_norm=offdiag_norm(L),
        inversions=inversion_count(d),
        lyapunov=flows.lyapunov(L, spec),
        spectral_drift=spectral_drift(L, ref),
        traces=(i2, i3, i4),
        traced_diagonals=tuple(float(d[i]) for i in traced),
    )


def _inertia_apply(B, spec):
    # <A B, B> with A the flow's (positive) inertia operator
    if spec.kind == "toda":
        return B
    return -spec.laplacian.apply(B)


def _inertia_solve(B, spec):
    from .quantization import poisson_solve

    if spec.kind == "toda":
        return B
    return poisson_solve(spec.laplacian, B)


def orthogonality_residual(L, spec, degenerate_tol=1e-300):
    """Normalized pairing between the flow direction [B, L] and the
    inertia image of the generator B; zero in exact arithmetic.

    Returns None (not applicable) when either direction vanishes, e.g. for
    diagonal L.
    """
    B = flows.generator(L, spec)
    direction = commutator(B, L)
    AinvB = _inertia_solve(B, spec)
    nd = float(np.linalg.norm(direction))
    na = float(np.linalg.norm(AinvB))
    if nd <= degenerate_tol or na <= degenerate_tol:
        return None
    return abs(frobenius_inner(direction, AinvB)) / (nd * na)


def generator_inertia_norm(L, spec):
    """||B||_A = sqrt(<A B, B>) for the flow's generator at L."""
    B = flows.generator(L, spec)
    val = frobenius_inner(_inertia_apply(B, spec), B)
    return float(np.sqrt(max(val, 0.0)))


def contraction_slack_series(traj, spec, energy_tol=1e-9):
    """Per-time slack t (E(0) - E(t)) - P(t)^2 along the trajectory.

    P is the trapezoid pathlength of ||B||_A and E = -lyapunov.  Raises
    when the energy is non-monotone beyond ``energy_tol`` times its
    overall scale (an integrator failure, not a flow property).
    """
    energies = np.array([-flows.lyapunov(S, spec) for S in traj.snapshots])
    scale = max(float(np.max(np.abs(energies))), 1e-300)
    rises = np.diff(energies)
    if rises.size and np.any(rises > energy_tol * scale):
        raise RuntimeError(
            f"energy increased by {float(np.max(rises)):.3e} along the "
            "trajectory; integrator failure"
        )
    speeds = np.array([generator_inertia_norm(S, spec) for S in traj.snapshots])
    times = np.asarray(traj.times)
    slacks = np.zeros(len(times))
    path = 0.0
    for i in range(1, len(times)):
        dt = times[i] - times[i - 1]
        path += 0.5 * dt * (speeds[i] + speeds[i - 1])
        slacks[i] = times[i] * (energies[0] - energies[i]) - path * path
    return times, slacks


def contraction_check(traj, spec, energy_tol=1e-9):
    """Minimum pathlength-bound slack over the recorded times (0 included).

    A gradient flow satisfies slack >= 0 up to quadrature and integrator
    error; a clearly negative value falsifies the distance inequality.
    """
    _, slacks = contraction_slack_series(traj, spec, energy_tol=energy_tol)
    return float(np.min(slacks))
