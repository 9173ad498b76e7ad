"""Time steppers and the trajectory runner.

The workhorse is the isospectral midpoint step.  With B the generator at
the stage matrix X, one step reads

    X = (I - h B / 2)^{-1} L (I - h B / 2)^{-T}
    L_next = (I - h B / 2)^T X (I - h B / 2)

which is conjugation of L by the Cayley factor of the skew matrix h B / 2,
hence orthogonal: the spectrum is preserved to round-off no matter how
accurate the stage is.  The stage is found by plain fixed-point iteration
starting from X = L; divergence is surfaced as an error (halve h), never
hidden.  A classical RK4 step is kept as the non-preserving control.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import diagnostics, flows
from .matrixcore import jacobi_spectrum, symmetric


class FixedPointError(RuntimeError):
    """Stage iteration failed to contract within the iteration cap."""


class NumericalFailure(RuntimeError):
    """Non-finite state encountered; carries the failing step index."""

    def __init__(self, step, message):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class IntegratorConfig:
    h: float
    steps: int
    fp_tol: float = 1e-12
    fp_maxit: int = 100
    record_every: int = 1
    method: str = "isomp"

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.fp_tol <= 0:
            raise ValueError("fp_tol must be positive")
        if self.fp_maxit < 1:
            raise ValueError("fp_maxit must be at least 1")
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        if self.method not in ("isomp", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class Trajectory:
    """Strided snapshots plus the per-step diagnostics records."""

    times: np.ndarray
    snapshots: list = field(repr=False)
    records: list = field(repr=False)


def _isomp_step_stage(L, gen, h, fp_tol=1e-12, fp_maxit=100, stage_guess=None):
    """One isospectral midpoint step of size h (h may be negative).

    ``gen`` maps the stage matrix to its skew generator.  ``stage_guess``
    warm-starts the stage iteration (the previous step's stage is a good
    guess along a trajectory); the fixed point itself is unchanged.
    Returns (next state, converged stage).  Raises FixedPointError when
    the stage iteration does not settle within ``fp_maxit`` sweeps.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    eye = np.eye(n)
    X = L if stage_guess is None else stage_guess
    B = gen(X)
    converged = False
    for _ in range(fp_maxit):
        lu = lu_factor(eye - (h / 2.0) * B)
        Xn = lu_solve(lu, lu_solve(lu, L.T).T)
        Xn = (Xn + Xn.T) / 2.0
        delta = float(np.linalg.norm(Xn - X))
        X = Xn
        B = gen(X)
        if delta <= fp_tol:
            converged = True
            break
    if not converged:
        raise FixedPointError(
            f"stage iteration stalled above tol {fp_tol:g} after {fp_maxit} "
            f"sweeps (last update {delta:.3e}); halve h"
        )
    C = eye - (h / 2.0) * B
    lu = lu_factor(C)
    X = lu_solve(lu, lu_solve(lu, L.T).T)
    return symmetric(C.T @ X @ C), X


def isomp_step(L, gen, h, fp_tol=1e-12, fp_maxit=100, stage_guess=None):
    """One isospectral midpoint step; see _isomp_step_stage."""
    out, _ = _isomp_step_stage(L, gen, h, fp_tol, fp_maxit, stage_guess)
    return out


def rk4_step(L, rhs, h):
    """Classical 4-stage Runge-Kutta on the matrix ODE (not isospectral)."""
    k1 = rhs(L)
    k2 = rhs(L + (h / 2.0) * k1)
    k3 = rhs(L + (h / 2.0) * k2)
    k4 = rhs(L + h * k3)
    return L + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def run_flow(L0, spec, cfg, traced=()):
    """Integrate the flow, recording diagnostics every step and snapshots
    every ``cfg.record_every`` steps (the final state is always kept)."""
    L = symmetric(L0)
    n = L.shape[0]
    traced = tuple(int(i) for i in traced)
    for i in traced:
        if not 0 <= i < n:
            raise ValueError(f"traced index {i} outside [0, {n})")
    ref = jacobi_spectrum(L)

    if spec.kind == "qr":
        def advance(M, _stage):
            return flows.qr_step(M, cfg.h), None
    elif cfg.method == "isomp":
        def advance(M, stage):
            return _isomp_step_stage(
                M,
                lambda X: flows.generator(X, spec),
                cfg.h,
                fp_tol=cfg.fp_tol,
                fp_maxit=cfg.fp_maxit,
                stage_guess=stage,
            )
    else:
        def advance(M, _stage):
            return rk4_step(M, lambda X: flows.rhs(X, spec), cfg.h), None

    times = [0.0]
    snapshots = [L.copy()]
    records = [diagnostics.make_record(0, 0.0, L, spec, ref, traced)]
    stage = None
    for step in range(1, cfg.steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            L, stage = advance(L, stage)
        if not np.all(np.isfinite(L)):
            raise NumericalFailure(step, f"non-finite state at step {step}")
        if cfg.method == "rk4" and spec.kind != "qr":
            L = symmetric(L)
        t = step * cfg.h
        records.append(diagnostics.make_record(step, t, L, spec, ref, traced))
        if step % cfg.record_every == 0 or step == cfg.steps:
            times.append(t)
            snapshots.append(L.copy())
    return Trajectory(times=np.asarray(times), snapshots=snapshots, records=records)
