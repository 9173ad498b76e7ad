"""Dense real linear-algebra kernels and reference oracles.

All operations are pure functions over float64 numpy arrays.  Matrices
claimed symmetric or skew are gated here: constructors symmetrize and
reject inputs whose asymmetry defect exceeds ``ASYM_TOL`` times the norm,
so integrator round-off drift is detected instead of silently absorbed.
"""

from dataclasses import dataclass

import numpy as np

from . import _accel

ASYM_TOL = 1e-10

# matrix_exp scaling target and Taylor order; validated against the
# closed-form rotation in the test suite.
_EXP_SCALE_LIMIT = 0.5
_EXP_TAYLOR_ORDER = 13

_JACOBI_MAX_SWEEPS = 30


class MatrixError(ValueError):
    """Invalid matrix input (shape, finiteness, symmetry class)."""


class AsymmetryError(MatrixError):
    """Asymmetry defect beyond the round-off gate."""


class ZeroPivotError(MatrixError):
    """Singular band encountered during Thomas elimination."""


class SingularMatrixError(MatrixError):
    """Matrix singular to working precision."""


class ConvergenceError(RuntimeError):
    """Iterative solver exceeded its bounded iteration count."""


def _as_square(X, name="matrix"):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise MatrixError(f"{name} must be square, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise MatrixError(f"{name} has non-finite entries")
    return X


def _check_same_dim(X, Y):
    if X.shape != Y.shape:
        raise MatrixError(f"dimension mismatch: {X.shape} vs {Y.shape}")


def asymmetry_defect(X):
    """Frobenius norm of the antisymmetric part of X."""
    X = np.asarray(X, dtype=float)
    return float(np.linalg.norm(X - X.T)) / 2.0


def symmetric(X):
    """Return (X + X^T)/2 after gating the asymmetry defect.

    Raises AsymmetryError when the defect exceeds ASYM_TOL * ||X||_F.
    """
    X = _as_square(X)
    defect = asymmetry_defect(X)
    scale = float(np.linalg.norm(X))
    if defect > ASYM_TOL * scale:
        raise AsymmetryError(
            f"asymmetry defect {defect:.3e} exceeds {ASYM_TOL:g} * ||X|| = "
            f"{ASYM_TOL * scale:.3e}"
        )
    return (X + X.T) / 2.0


def skew(X):
    """Return (X - X^T)/2 after gating the symmetric-part defect."""
    X = _as_square(X)
    defect = float(np.linalg.norm(X + X.T)) / 2.0
    scale = float(np.linalg.norm(X))
    if defect > ASYM_TOL * scale:
        raise AsymmetryError(
            f"symmetric-part defect {defect:.3e} exceeds tolerance "
            f"{ASYM_TOL * scale:.3e}"
        )
    out = (X - X.T) / 2.0
    np.fill_diagonal(out, 0.0)
    return out


def commutator(X, Y):
    """X @ Y - Y @ X."""
    X = _as_square(X, "X")
    Y = _as_square(Y, "Y")
    _check_same_dim(X, Y)
    return X @ Y - Y @ X


def frobenius_inner(X, Y):
    """Entrywise inner product sum_ij X_ij * Y_ij."""
    X = _as_square(X, "X")
    Y = _as_square(Y, "Y")
    _check_same_dim(X, Y)
    return float(np.sum(X * Y))


@dataclass(frozen=True)
class SpectrumReport:
    """Ascending eigenvalues plus the max residual ||Sv - lambda v||_inf."""

    eigenvalues: np.ndarray
    residual: float


def jacobi_spectrum(S, tol=1e-13):
    """Eigenvalues of a symmetric matrix by classical cyclic Jacobi.

    Rotations sweep all (p, q) pairs until the off-diagonal Frobenius norm
    drops below ``tol`` times the Frobenius norm of S.  Serves as the
    reference eigensolver for every spectrum comparison in the package.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    S = symmetric(S)
    n = S.shape[0]
    A = S.copy()
    V = np.eye(n)
    scale = float(np.linalg.norm(S))
    if scale == 0.0:
        return SpectrumReport(np.zeros(n), 0.0)
    sweeps, off, converged = _accel.jacobi(A, V, tol * scale, _JACOBI_MAX_SWEEPS)
    if not converged:
        raise ConvergenceError(
            f"Jacobi did not converge in {_JACOBI_MAX_SWEEPS} sweeps "
            f"(off-diagonal norm {off:.3e})"
        )
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    V = V[:, order]
    residual = float(np.max(np.abs(S @ V - V * w[None, :])))
    return SpectrumReport(w, residual)


def householder_qr(M):
    """QR factorization with the sign convention diag(R) > 0.

    The sign fix makes the factorization unique for nonsingular M, hence
    bit-identical across repeated runs.  Raises SingularMatrixError when a
    diagonal of R is zero to working precision.
    """
    M = _as_square(M)
    n = M.shape[0]
    R = M.copy()
    Q = np.eye(n)
    for k in range(n - 1):
        x = R[k:, k]
        normx = float(np.linalg.norm(x))
        if normx == 0.0:
            continue
        v = x.copy()
        v[0] += normx if v[0] >= 0 else -normx
        vnorm2 = float(v @ v)
        if vnorm2 == 0.0:
            continue
        w = 2.0 / vnorm2
        R[k:, k:] -= np.outer(w * v, v @ R[k:, k:])
        Q[:, k:] -= np.outer(Q[:, k:] @ (w * v), v)
    d = np.diag(R).copy()
    sing_tol = n * np.finfo(float).eps * float(np.linalg.norm(M))
    if np.any(np.abs(d) <= sing_tol):
        raise SingularMatrixError("matrix singular to working precision")
    signs = np.where(d > 0, 1.0, -1.0)
    R = signs[:, None] * R
    Q = Q * signs[None, :]
    R[np.tril_indices(n, -1)] = 0.0
    return Q, R


def matrix_exp(X):
    """Matrix exponential by scaling and squaring.

    Halves X until its 1-norm is at most 0.5, applies an order-13 Taylor
    polynomial in Horner form, then squares back.  Relative error is below
    1e-12 for ||X|| <= 10; extreme norms overflow and are rejected.
    """
    X = _as_square(X)
    n = X.shape[0]
    norm = float(np.linalg.norm(X, 1))
    s = 0
    if norm > _EXP_SCALE_LIMIT:
        s = int(np.ceil(np.log2(norm / _EXP_SCALE_LIMIT)))
    A = X / (2.0**s)
    E = np.eye(n)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(_EXP_TAYLOR_ORDER, 0, -1):
            E = np.eye(n) + (A @ E) / k
        for _ in range(s):
            E = E @ E
    if not np.all(np.isfinite(E)):
        raise MatrixError("matrix_exp overflow for extreme norm")
    return E


def tridiag_solve(sub, main, sup, rhs):
    """Solve a tridiagonal system by Thomas elimination.

    ``sub`` and ``sup`` have length n-1, ``main`` and ``rhs`` length n.
    Raises ZeroPivotError when elimination hits a zero pivot (singular
    band).
    """
    main = np.asarray(main, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = main.shape[0]
    sub = np.asarray(sub, dtype=float)
    sup = np.asarray(sup, dtype=float)
    if sub.ndim == 0:
        sub = np.full(max(n - 1, 0), float(sub))
    if sup.ndim == 0:
        sup = np.full(max(n - 1, 0), float(sup))
    if main.ndim != 1 or rhs.shape != main.shape:
        raise MatrixError("main and rhs must be 1-d arrays of equal length")
    if sub.shape[0] != n - 1 or sup.shape[0] != n - 1:
        raise MatrixError("sub and sup must have length n-1")
    if n == 0:
        return np.zeros(0)
    x, ok = _accel.thomas(sub, main, sup, rhs)
    if not ok:
        raise ZeroPivotError("zero pivot: tridiagonal system is singular")
    return x


def write_matrix_text(path, X):
    """Write the plain text matrix format: first line N, then N rows."""
    X = _as_square(X)
    n = X.shape[0]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n}\n")
        for row in X:
            fh.write(" ".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def read_matrix_text(path):
    """Read the plain text matrix format written by write_matrix_text."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise MatrixError(f"{path}: empty matrix file")
    n = int(tokens[0])
    vals = tokens[1:]
    if len(vals) != n * n:
        raise MatrixError(f"{path}: expected {n * n} entries, got {len(vals)}")
    X = np.array([float(v) for v in vals]).reshape(n, n)
    return X
