"""Right-hand sides and Lyapunov functionals for the matrix flows.

All three continuous flows share the Lax shape Ldot = [B(L), L] with a
skew generator B:

    toda      B = [D, L]                        (identity inertia)
    ipm       B = -lapinv([D, L])               (Laplacian inertia)
    diagflow  B = -lapinv([diag(L), L])

where lapinv is the traceless Poisson solve and D the fixed potential
diagonal.  The signs are pinned so that trace(D L) (toda, ipm) and the
diagonal energy (diagflow) are non-decreasing along the flow.  The fourth
kind, "qr", is the discrete map L -> Q^T L Q from the QR factors of
exp(h L).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrixcore import (
    MatrixError,
    _as_square,
    commutator,
    householder_qr,
    matrix_exp,
    symmetric,
)
from .quantization import DiscreteLaplacian, poisson_solve

FLOW_KINDS = ("toda", "ipm", "diagflow", "qr")


@dataclass(frozen=True)
class FlowSpec:
    """Which flow to run, with its potential diagonal and Laplacian tables."""

    kind: str
    potential: Optional[np.ndarray] = None
    laplacian: Optional[DiscreteLaplacian] = None

    def __post_init__(self):
        if self.kind not in FLOW_KINDS:
            raise ValueError(f"unknown flow kind {self.kind!r}, expected one of {FLOW_KINDS}")
        if self.kind in ("toda", "ipm") and self.potential is None:
            raise ValueError(f"{self.kind} flow needs a potential diagonal")
        if self.kind in ("ipm", "diagflow") and self.laplacian is None:
            raise ValueError(f"{self.kind} flow needs Laplacian tables")
        if self.potential is not None and not np.all(np.isfinite(self.potential)):
            raise ValueError("potential diagonal must be finite")


def potential_diagonal(n):
    """Equidistant diagonal -1, ..., 1 with n entries (n >= 2)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return -1.0 + 2.0 * np.arange(n, dtype=float) / (n - 1)


def _ad_diag(d, L):
    # [diag(d), L]_ij = (d_i - d_j) L_ij
    return (d[:, None] - d[None, :]) * L


def toda_rhs(L, d):
    """[L, [L, D]] for the diagonal potential D."""
    L = _as_square(L)
    d = np.asarray(d, dtype=float)
    if d.shape[0] != L.shape[0]:
        raise MatrixError(f"dimension mismatch: {d.shape[0]} vs {L.shape[0]}")
    B = _ad_diag(d, L)  # [D, L] = -[L, D]
    return commutator(B, L)


def ipm_rhs(L, d, lap):
    """-[lapinv [D, L], L]; the bracket [D, L] is skew and traceless, so
    the Poisson solve is always well posed."""
    L = _as_square(L)
    d = np.asarray(d, dtype=float)
    if d.shape[0] != L.shape[0]:
        raise MatrixError(f"dimension mismatch: {d.shape[0]} vs {L.shape[0]}")
    B = -poisson_solve(lap, _ad_diag(d, L))
    return commutator(B, L)


def diagflow_rhs(L, lap):
    """-[lapinv [diag(L), L], L]; vanishes for diagonal L."""
    L = _as_square(L)
    B = -poisson_solve(lap, _ad_diag(np.diag(L).copy(), L))
    return commutator(B, L)


def generator(L, spec):
    """The skew matrix B with Ldot = [B, L] for the given flow kind."""
    L = _as_square(L)
    if spec.kind == "toda":
        return _ad_diag(spec.potential, L)
    if spec.kind == "ipm":
        return -poisson_solve(spec.laplacian, _ad_diag(spec.potential, L))
    if spec.kind == "diagflow":
        return -poisson_solve(spec.laplacian, _ad_diag(np.diag(L).copy(), L))
    raise ValueError("qr iteration is a discrete map and has no generator")


def rhs(L, spec):
    """Kind-dispatched right-hand side, always equal to [generator, L]."""
    return commutator(generator(L, spec), L)


def lyapunov(L, spec):
    """Monotone functional of the flow: trace(D L) for toda/ipm, the
    diagonal energy sum(L_ii^2)/2 for diagflow and the qr map."""
    L = _as_square(L)
    if spec.kind in ("toda", "ipm"):
        return float(np.sum(spec.potential * np.diag(L)))
    return 0.5 * float(np.sum(np.diag(L) ** 2))


def qr_step(L, h):
    """One QR-iteration step: factor exp(h L) = QR, return Q^T L Q.

    Conjugation by the orthogonal factor is exactly isospectral, and for
    tridiagonal L the tridiagonal shape survives to round-off.
    """
    if h == 0:
        raise ValueError("step size must be nonzero")
    L = symmetric(L)
    Q, _ = householder_qr(matrix_exp(h * L))
    return symmetric(Q.T @ L @ Q)
