"""Quantized-sphere machinery.

A real symmetric N x N matrix plays the role of a function on the sphere.
The bridge is the spin-(N-1)/2 representation: three angular-momentum
generators define a discrete Laplacian

    lap(W) = -sum_a [J_a, [J_a, W]]

whose eigenvalues are exactly -l(l+1) for l = 0..N-1 with multiplicity
2l+1, matching the Laplace-Beltrami spectrum.  The two off-axis
double-commutators combine into (ad+ ad- + ad- ad+)/2 built from the real
ladder matrices, so everything stays in real arithmetic and symmetric
(resp. skew) input gives symmetric (resp. skew) output.

The operator preserves every diagonal offset and acts on each one as a
symmetric tridiagonal matrix.  That structure gives the O(N^2) Poisson
solver: one Thomas elimination per offset.  The offset-0 block is singular
with kernel spanned by the constant band (the identity matrix), so it is
deflated by one row and the solution recentred to zero trace.

Conventions (pinned by the visualization tests): J3 = diag(s, s-1, ..., -s)
with matrix row 0 corresponding to the north pole, ladder coefficients
c_k = sqrt(k (n - k)), and basis eigenvectors sign-fixed so their first
non-negligible component is positive.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _accel
from .matrixcore import MatrixError, _as_square, _check_same_dim

_SIGN_FIX_REL_TOL = 1e-12

_CACHE_MAGIC = b"ZQB1"


class SolvabilityError(MatrixError):
    """Poisson right-hand side outside the range of the Laplacian."""


@dataclass(frozen=True)
class SpinGenerators:
    """Spin-s angular momentum data for the n-dimensional representation.

    j3_diag holds mu_k = s - k (strictly decreasing); ladder holds
    c_k = sqrt(k (n - k)) for k = 1..n-1, the superdiagonal of the raising
    operator, with entry c_k at position (k-1, k).
    """

    n: int
    spin: float
    j3_diag: np.ndarray
    ladder: np.ndarray

    def padded_ladder(self):
        """c_j for j = 0..n with the zero end slots, handy for band ops."""
        c = np.zeros(self.n + 1)
        c[1:self.n] = self.ladder
        return c


def build_generators(n):
    """Spin generators for dimension n >= 2."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    s = (n - 1) / 2.0
    mu = s - np.arange(n, dtype=float)
    k = np.arange(1, n, dtype=float)
    c = np.sqrt(k * (n - k))
    return SpinGenerators(n=n, spin=s, j3_diag=mu, ladder=c)


def raising_matrix(gen):
    J = np.zeros((gen.n, gen.n))
    J[np.arange(gen.n - 1), np.arange(1, gen.n)] = gen.ladder
    return J


def _ad_plus(c, W):
    # [J+, W] with J+ the raising matrix whose superdiagonal is c
    out = np.zeros_like(W)
    out[:-1, :] += c[:, None] * W[1:, :]
    out[:, 1:] -= W[:, :-1] * c[None, :]
    return out


def _ad_minus(c, W):
    # [J-, W] with J- = J+^T
    out = np.zeros_like(W)
    out[1:, :] += c[:, None] * W[:-1, :]
    out[:, :-1] -= W[:, 1:] * c[None, :]
    return out


def laplacian_apply(gen, W):
    """Apply the discrete Laplacian to a square matrix.

    Real-arithmetic form: -(ad+ ad- + ad- ad+)(W)/2 - off^2 * W where off
    multiplies the diagonal at signed offset m by m^2.
    """
    W = _as_square(W)
    if W.shape[0] != gen.n:
        raise MatrixError(f"dimension mismatch: {W.shape[0]} vs {gen.n}")
    c = gen.ladder
    term = _ad_plus(c, _ad_minus(c, W)) + _ad_minus(c, _ad_plus(c, W))
    idx = np.arange(gen.n)
    offs = idx[None, :] - idx[:, None]
    return -0.5 * term - (offs.astype(float) ** 2) * W


# ----------------------------------------------------------------------
# Band-restricted Laplacian.  A band at signed offset o of length n-|o|
# stores W[k, k+o] (o >= 0) or W[k-o, k] (o < 0) at slot k.  The ladder
# commutators shift a band by one offset; composing them keeps everything
# O(band length), which is what makes O(N^2) probing and solving possible.

def _adp_band(C, o, v):
    n = C.shape[0] - 1
    if o >= 0:
        q = n - o - 1
        return C[1:q + 1] * v[1:q + 1] - C[o + 1:o + q + 1] * v[:q]
    p = -o
    q = n - p + 1
    z = np.zeros(q)
    z[:-1] += C[p:n] * v
    z[1:] -= C[1:q] * v
    return z


def _adm_band(C, o, v):
    n = C.shape[0] - 1
    if o >= 1:
        q = n - o + 1
        u = np.zeros(q)
        u[1:] += C[1:q] * v
        u[:-1] -= C[o:n] * v
        return u
    p = -o
    q = n - p - 1
    return C[p + 1:p + 1 + q] * v[:q] - C[1:q + 1] * v[1:q + 1]


def _lap_band(C, m, w):
    # Laplacian restricted to offset m >= 0, applied to band vector w
    t1 = _adp_band(C, m - 1, _adm_band(C, m, w))
    t2 = _adm_band(C, m + 1, _adp_band(C, m, w))
    return -0.5 * (t1 + t2) - float(m * m) * w


class DiscreteLaplacian:
    """Per-offset symmetric-tridiagonal coefficient tables of the Laplacian.

    mains[m] has length n-m and offs[m] length n-m-1 for offsets
    m = 0..n-1; the same tables act on offset -m.  Solver-ready flattened
    copies (with the singular offset-0 block deflated by its last row) are
    prepared once at construction.
    """

    def __init__(self, n, mains, offs):
        self.n = n
        self.mains = mains
        self.offs = offs
        self._build_solver_tables()

    def _build_solver_tables(self):
        n = self.n
        lens = [n - 1] + [n - m for m in range(1, n)]
        starts = np.concatenate(([0], np.cumsum(lens)[:-1])).astype(np.int64)
        total = int(np.sum(lens))
        main_flat = np.empty(total)
        off_flat = np.zeros(total)
        # offset 0, deflated: drop the last row/column of the block
        q0 = n - 1
        main_flat[:q0] = self.mains[0][:q0]
        if q0 > 1:
            off_flat[:q0 - 1] = self.offs[0][:q0 - 1]
        pos = q0
        for m in range(1, n):
            q = n - m
            main_flat[pos:pos + q] = self.mains[m]
            if q > 1:
                off_flat[pos:pos + q - 1] = self.offs[m]
            pos += q
        self._sol_main = main_flat
        self._sol_off = off_flat
        self._sol_starts = starts
        self._sol_lens = np.asarray(lens, dtype=np.int64)
        self._sol_total = total

    def band_apply(self, m, w):
        """Tridiagonal action of the stored offset-|m| block on a band."""
        m = abs(m)
        main = self.mains[m]
        off = self.offs[m]
        y = main * w
        if w.shape[0] > 1:
            y[:-1] += off * w[1:]
            y[1:] += off * w[:-1]
        return y

    def apply(self, W):
        """Apply the Laplacian through the stored bands (all offsets)."""
        W = _as_square(W)
        if W.shape[0] != self.n:
            raise MatrixError(f"dimension mismatch: {W.shape[0]} vs {self.n}")
        out = np.zeros_like(W)
        idx = np.arange(self.n)
        for m in range(self.n):
            band = np.diagonal(W, m)
            if np.any(band):
                out[idx[:self.n - m], idx[:self.n - m] + m] = self.band_apply(m, band)
            if m > 0:
                band = np.diagonal(W, -m)
                if np.any(band):
                    out[idx[:self.n - m] + m, idx[:self.n - m]] = self.band_apply(m, band)
        return out


def band_coefficients(gen):
    """Extract the per-offset tridiagonal tables by probing.

    For each offset the band Laplacian is applied to comb vectors (unit
    bands on every third slot); teeth three slots apart cannot overlap
    through a tridiagonal stencil, so all coefficients are read off
    exactly.  Total setup cost O(n^2).
    """
    n = gen.n
    C = gen.padded_ladder()
    mains = []
    offs = []
    for m in range(n):
        q = n - m
        main = np.empty(q)
        off = np.empty(max(q - 1, 0))
        for r in range(min(3, q)):
            w = np.zeros(q)
            w[r::3] = 1.0
            y = _lap_band(C, m, w)
            main[r::3] = y[r::3]
            for k in range(r, q - 1, 3):
                off[k] = y[k + 1]
        mains.append(main)
        offs.append(off)
    return DiscreteLaplacian(n, mains, offs)


def poisson_solve(lap, P):
    """Solve lap(W) = P for the unique traceless W, one Thomas pass per
    signed offset (O(n^2) in total).

    Requires trace(P) = 0 to 1e-10 * ||P|| (the identity spans the kernel).
    The symmetry class of P is preserved: symmetric in, symmetric out;
    skew in, skew out.
    """
    P = _as_square(P)
    n = lap.n
    if P.shape[0] != n:
        raise MatrixError(f"dimension mismatch: {P.shape[0]} vs {n}")
    normP = float(np.linalg.norm(P))
    tr = float(np.trace(P))
    if abs(tr) > 1e-10 * max(normP, 1e-300):
        raise SolvabilityError(
            f"trace {tr:.3e} breaks solvability (||P|| = {normP:.3e})"
        )
    if normP == 0.0:
        return np.zeros_like(P)
    P = np.ascontiguousarray(P)
    return _accel.poisson_fused(
        P, n, lap._sol_starts, lap._sol_lens, lap._sol_main, lap._sol_off
    )


def save_band_cache(lap, path):
    """Binary cache: magic "ZQB1", little-endian uint64 n, bands in offset
    order (main then off, float64 LE).  Purely an optimization."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(np.uint64(lap.n).astype("<u8").tobytes())
        for m in range(lap.n):
            fh.write(lap.mains[m].astype("<f8").tobytes())
            fh.write(lap.offs[m].astype("<f8").tobytes())


def load_band_cache(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CACHE_MAGIC:
            raise ValueError(f"{path}: bad band-cache header {magic!r}")
        n = int(np.frombuffer(fh.read(8), dtype="<u8")[0])
        mains = []
        offs = []
        for m in range(n):
            q = n - m
            mains.append(np.frombuffer(fh.read(8 * q), dtype="<f8").copy())
            qo = max(q - 1, 0)
            offs.append(np.frombuffer(fh.read(8 * qo), dtype="<f8").copy())
    return DiscreteLaplacian(n, mains, offs)


# ----------------------------------------------------------------------
# Quantized basis: per-offset eigenvectors of the band blocks, labelled by
# the degree l recovered from the eigenvalue -l(l+1).

def _sign_fix(v):
    thresh = _SIGN_FIX_REL_TOL * float(np.max(np.abs(v)))
    for x in v:
        if abs(x) > thresh:
            if x < 0:
                return -v
            return v
    return v


@dataclass(frozen=True)
class QuantizedBasis:
    """Orthonormal symmetric basis matrices indexed by (l, m).

    vecs[m] holds the offset-m band eigenvectors as columns, ordered by
    ascending degree l = m..n-1; the dense basis matrix for (l, m) carries
    the band on both signed offsets, scaled to unit Frobenius norm.
    """

    n: int
    vecs: list = field(repr=False)
    degrees: list = field(repr=False)

    def count(self):
        return sum(v.shape[1] for v in self.vecs)

    def matrix(self, l, m):
        if m < 0 or m >= self.n or l < m or l >= self.n:
            raise ValueError(f"no basis element (l={l}, m={m}) for n={self.n}")
        v = self.vecs[m][:, l - m]
        T = np.zeros((self.n, self.n))
        idx = np.arange(self.n - m)
        if m == 0:
            T[idx, idx] = v
        else:
            T[idx, idx + m] = v / np.sqrt(2.0)
            T[idx + m, idx] = v / np.sqrt(2.0)
        return T

    def coefficients(self, L):
        """Expansion coefficients of a symmetric matrix, per offset.

        Returns a list over m of arrays indexed by l-m; entry (l, m) is
        the Frobenius inner product of L with the (l, m) basis matrix.
        """
        L = _as_square(L)
        if L.shape[0] != self.n:
            raise MatrixError(f"dimension mismatch: {L.shape[0]} vs {self.n}")
        out = []
        for m in range(self.n):
            band = np.diagonal(L, m)
            coef = self.vecs[m].T @ band
            if m > 0:
                coef = coef * np.sqrt(2.0)
            out.append(coef)
        return out


def quantized_basis(lap):
    """Eigendecompose every offset block into the (l, m) basis."""
    n = lap.n
    vecs = []
    degrees = []
    for m in range(n):
        main = lap.mains[m]
        off = lap.offs[m]
        if main.shape[0] == 1:
            w = main.copy()
            V = np.ones((1, 1))
        else:
            w, V = eigh_tridiagonal(main, off)
        # eigenvalue -l(l+1)  ->  l = (sqrt(1 - 4w) - 1)/2
        ls = np.rint((np.sqrt(1.0 - 4.0 * w) - 1.0) / 2.0).astype(int)
        order = np.argsort(ls)
        ls = ls[order]
        V = V[:, order]
        expected = np.arange(m, n)
        if not np.array_equal(ls, expected):
            raise RuntimeError(
                f"offset {m}: degree labels {ls} do not match {expected}"
            )
        V = np.column_stack([_sign_fix(V[:, j]) for j in range(V.shape[1])])
        vecs.append(V)
        degrees.append(ls)
    return QuantizedBasis(n=n, vecs=vecs, degrees=degrees)


# ----------------------------------------------------------------------
# Sphere fields: evaluate the harmonic expansion on a lat-lon grid.

@dataclass(frozen=True)
class SphereField:
    """Scalar samples on an equiangular colatitude/longitude grid."""

    colat: np.ndarray
    lon: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.colat.shape[0] < 2 or self.lon.shape[0] < 2:
            raise ValueError("grid resolution must be at least 2 x 2")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field samples must be finite")


def legendre_normalized(lmax, m, x):
    """Orthonormalized associated Legendre values P~_{l,m}(x), l = m..lmax.

    Normalization is the spherical-harmonic one: the functions
    P~_{l,0}(cos t) and sqrt(2) P~_{l,m}(cos t) cos(m p) integrate to one
    over the sphere.  Stable three-term recurrence, no Condon-Shortley
    phase.  Returns an array of shape (lmax - m + 1, len(x)).
    """
    x = np.asarray(x, dtype=float)
    sint = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    out = np.empty((lmax - m + 1, x.shape[0]))
    pmm = np.full_like(x, np.sqrt(1.0 / (4.0 * np.pi)))
    for k in range(1, m + 1):
        pmm = pmm * sint * np.sqrt((2.0 * k + 1.0) / (2.0 * k))
    out[0] = pmm
    if lmax == m:
        return out
    out[1] = np.sqrt(2.0 * m + 3.0) * x * pmm
    for l in range(m + 2, lmax + 1):
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
        b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
        out[l - m] = a * (x * out[l - m - 1] - b * out[l - m - 2])
    return out


def matrix_to_field(L, basis, res=(181, 360)):
    """Evaluate a symmetric matrix as a function on the sphere.

    The (l, m) coefficients multiply the real spherical harmonics with the
    same indices; colatitude 0 is the north pole.  Linear in L.
    """
    nlat, nlon = res
    if nlat < 2 or nlon < 2:
        raise ValueError("resolution must be at least 2 in each direction")
    L = _as_square(L)
    coeffs = basis.coefficients(L)
    n = basis.n
    colat = np.linspace(0.0, np.pi, nlat)
    lon = np.linspace(-np.pi, np.pi, nlon, endpoint=False)
    x = np.cos(colat)
    G = np.zeros((nlat, n))
    for m in range(n):
        cm = coeffs[m]
        if not np.any(cm):
            continue
        P = legendre_normalized(n - 1, m, x)
        G[:, m] = P.T @ cm
    az = np.cos(np.outer(np.arange(n), lon))
    az[1:, :] *= np.sqrt(2.0)
    values = G @ az
    return SphereField(colat=colat, lon=lon, values=values)
