"""1D dispersionless Toda system and its Lagrangian counterpart.

State (a, b) lives on a uniform periodic grid with compactly supported
data mimicking the line.  Spatial derivatives are centered differences:
the system is Hamiltonian and skew-adjoint differencing keeps the
quadratic integral exactly conserved in space, so any drift measures the
time integrator alone.  Artificial viscosity would corrupt the conserved
integrals; breakdown (a turning negative, or non-finite values) is
detected and reported instead of being suppressed.

The Lagrangian form evolves (phi, phidot) with the force assembled from
staggered slopes: phi' on links, then a centered flux difference back to
the nodes.  Mapping a = exp(-phi'), b = phidot therefore agrees with the
(a, b) system only up to O(dz^2), which is the consistency measured by
the refinement tests.
"""

import math
from dataclasses import dataclass

import numpy as np


class BreakdownError(RuntimeError):
    """Shock formation or non-finite values in the continuum state."""


@dataclass(frozen=True)
class AbState:
    z: np.ndarray
    dz: float
    a: np.ndarray
    b: np.ndarray
    length: float  # domain period

    def __post_init__(self):
        if np.any(self.a < 0):
            raise ValueError("field a must be nonnegative")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ValueError("fields must be finite")


def make_grid(npoints, length=1.0, origin=0.0):
    dz = length / npoints
    z = origin + dz * np.arange(npoints)
    return z, dz


def gaussian_bump_state(npoints=256, length=1.0, amplitude=0.3, width=0.15,
                        center=0.5):
    """Default initial data: Gaussian bump in a, zero b.

    The bump is wrapped over neighbouring periods so the field is smooth
    across the periodic seam (a bare Gaussian tail leaves a derivative
    kink there that pollutes the difference stencils).
    """
    z, dz = make_grid(npoints, length)
    a = np.zeros(npoints)
    for k in (-1, 0, 1):
        a += amplitude * np.exp(-((z - center + k * length) ** 2) / (2.0 * width**2))
    b = np.zeros(npoints)
    return AbState(z=z, dz=dz, a=a, b=b, length=length)


def _ddz(f, dz):
    return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dz)


def ab_rhs(state):
    """(da, db) = (-a b_z, -2 (a^2)_z) with periodic centered differences."""
    bz = _ddz(state.b, state.dz)
    a2z = _ddz(state.a**2, state.dz)
    return -state.a * bz, -2.0 * a2z


def step_ab(state, h):
    """RK4 update; aborts on CFL violation, negative a, or non-finite data."""
    bz = _ddz(state.b, state.dz)
    cfl = h * float(np.max(np.abs(bz)))
    if cfl > 0.5:
        raise BreakdownError(f"step gate h * max|b_z| = {cfl:.3f} > 0.5")

    def f(a, b):
        return -a * _ddz(b, state.dz), -2.0 * _ddz(a**2, state.dz)

    a, b = state.a, state.b
    k1a, k1b = f(a, b)
    k2a, k2b = f(a + 0.5 * h * k1a, b + 0.5 * h * k1b)
    k3a, k3b = f(a + 0.5 * h * k2a, b + 0.5 * h * k2b)
    k4a, k4b = f(a + h * k3a, b + h * k3b)
    an = a + (h / 6.0) * (k1a + 2 * k2a + 2 * k3a + k4a)
    bn = b + (h / 6.0) * (k1b + 2 * k2b + 2 * k3b + k4b)
    if not (np.all(np.isfinite(an)) and np.all(np.isfinite(bn))):
        raise BreakdownError("non-finite state (blow-up)")
    if np.any(an < 0):
        raise BreakdownError("field a went negative (shock/breakdown)")
    return AbState(z=state.z, dz=state.dz, a=an, b=bn, length=state.length)


def j_integral(state, k):
    """Conserved integral J_k by exact angle averaging.

    The angle average of (b + 2 a cos p)^k keeps only even powers of
    cos p, whose means are binomial(2j, j) / 4^j; the resulting integrand
    sum_j C(k, 2j) C(2j, j) b^(k-2j) a^(2j) is integrated by the periodic
    trapezoid rule.  For k = 2 this is the closed form b^2 + 2 a^2.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    a, b = state.a, state.b
    integrand = np.zeros_like(a)
    for j in range(k // 2 + 1):
        coef = math.comb(k, 2 * j) * math.comb(2 * j, j)
        integrand += coef * b ** (k - 2 * j) * a ** (2 * j)
    return float(state.dz * np.sum(integrand))


@dataclass(frozen=True)
class LagrangianState:
    z: np.ndarray
    dz: float
    phi: np.ndarray
    phidot: np.ndarray
    length: float

    def __post_init__(self):
        if np.any(link_slopes(self) <= 0):
            raise ValueError("phi must be increasing (discrete phi' > 0)")


def link_slopes(state):
    """(phi_{j+1} - phi_j)/dz on links, wrapping by the domain period."""
    d = np.roll(state.phi, -1) - state.phi
    d[-1] += state.length
    return d / state.dz


def node_slopes(state):
    """Centered phi' at the nodes, wrap-corrected by the period."""
    d = np.roll(state.phi, -1) - np.roll(state.phi, 1)
    d[-1] += state.length
    d[0] += state.length
    return d / (2.0 * state.dz)


def lagrangian_rhs(state):
    """Acceleration -2 d/dz exp(-2 phi') from staggered link slopes."""
    s = link_slopes(state)
    if np.any(s <= 0):
        raise ValueError("phi non-monotone: discrete phi' <= 0")
    g = np.exp(-2.0 * s)
    return -2.0 * (g - np.roll(g, 1)) / state.dz


def step_lagrangian(state, h):
    """RK4 update of (phi, phidot)."""

    def f(phi, phidot):
        tmp = LagrangianState(
            z=state.z, dz=state.dz, phi=phi, phidot=phidot, length=state.length
        )
        return phidot, lagrangian_rhs(tmp)

    p, v = state.phi, state.phidot
    k1p, k1v = f(p, v)
    k2p, k2v = f(p + 0.5 * h * k1p, v + 0.5 * h * k1v)
    k3p, k3v = f(p + 0.5 * h * k2p, v + 0.5 * h * k2v)
    k4p, k4v = f(p + h * k3p, v + h * k3v)
    pn = p + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
    vn = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    if not (np.all(np.isfinite(pn)) and np.all(np.isfinite(vn))):
        raise BreakdownError("non-finite Lagrangian state")
    return LagrangianState(z=state.z, dz=state.dz, phi=pn, phidot=vn,
                           length=state.length)


def lagrangian_to_ab(state):
    """Map (phi, phidot) to (a, b) = (exp(-phi'), phidot) at the nodes."""
    a = np.exp(-node_slopes(state))
    return AbState(z=state.z, dz=state.dz, a=a, b=state.phidot.copy(),
                   length=state.length)


def ab_consistency_residual(state):
    """Sup-norm gap between the Lagrangian force and the (a, b) momentum
    equation -2 (a^2)_z under the node map; O(dz^2) under refinement."""
    mapped = lagrangian_to_ab(state)
    _, db = ab_rhs(mapped)
    return float(np.max(np.abs(lagrangian_rhs(state) - db)))
