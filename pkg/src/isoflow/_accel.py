"""Hot numeric kernels, compiled with numba when available.

Every kernel exists twice: a numba ``@njit`` loop version and a vectorized
pure-numpy version.  The active backend is picked at import time; set
``ISOFLOW_NO_NUMBA=1`` to force the numpy path (the same switch the
benchmark script uses to compare the two).  Both variants stay importable
through :data:`IMPLS`.
"""

import os
import threading

import numpy as np
from scipy.linalg import solve_banded

_flag = os.environ.get("ISOFLOW_NO_NUMBA", "").strip().lower()
HAVE_NUMBA = _flag not in ("1", "true", "yes")
if HAVE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAVE_NUMBA = False

if not HAVE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend():
    """Name of the active kernel backend, "numba" or "numpy"."""
    return "numba" if HAVE_NUMBA else "numpy"


# ----------------------------------------------------------------------
# Thomas elimination for a single general tridiagonal system.
# Returns ok=False on a zero (to working precision) pivot.

def _thomas_core(sub, main, sup, rhs, x, cw, dw):
    n = main.shape[0]
    piv = main[0]
    scale = 0.0
    for i in range(n):
        s = abs(main[i])
        if i > 0:
            s += abs(sub[i - 1])
        if i < n - 1:
            s += abs(sup[i])
        if s > scale:
            scale = s
    tiny = 1e-14 * scale
    if abs(piv) <= tiny:
        return False
    cw[0] = sup[0] / piv if n > 1 else 0.0
    dw[0] = rhs[0] / piv
    for i in range(1, n):
        piv = main[i] - sub[i - 1] * cw[i - 1]
        if abs(piv) <= tiny:
            return False
        if i < n - 1:
            cw[i] = sup[i] / piv
        dw[i] = (rhs[i] - sub[i - 1] * dw[i - 1]) / piv
    x[n - 1] = dw[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dw[i] - cw[i] * x[i + 1]
    return True


_thomas_nb = njit(cache=True)(_thomas_core)


def thomas_numba(sub, main, sup, rhs):
    n = main.shape[0]
    x = np.empty(n)
    cw = np.empty(n)
    dw = np.empty(n)
    ok = _thomas_nb(sub, main, sup, rhs, x, cw, dw)
    return x, ok


def thomas_numpy(sub, main, sup, rhs):
    n = main.shape[0]
    ab = np.zeros((3, n))
    ab[1] = main
    if n > 1:
        ab[0, 1:] = sup
        ab[2, :-1] = sub
    try:
        x = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError:
        return np.empty(n), False
    except ValueError:
        return np.empty(n), False
    if not np.all(np.isfinite(x)):
        return x, False
    return x, True


# ----------------------------------------------------------------------
# Batched symmetric-tridiagonal solves over a flattened block layout.
# Blocks are negative definite by construction, so no pivoting is needed.
# ``off`` carries a zero separator at the last slot of every block, which
# lets the numpy variant treat the whole stack as one banded system.

def _block_thomas_core(main, off, starts, lens, out, cw):
    # forward sweep writes the transformed rhs into out in place; four
    # memory streams total keep the working set small per block
    for b in range(starts.shape[0]):
        s = starts[b]
        q = lens[b]
        piv = main[s]
        cw[s] = off[s] / piv if q > 1 else 0.0
        out[s] = out[s] / piv
        for i in range(s + 1, s + q):
            piv = main[i] - off[i - 1] * cw[i - 1]
            cw[i] = off[i] / piv
            out[i] = (out[i] - off[i - 1] * out[i - 1]) / piv
        for i in range(s + q - 2, s - 1, -1):
            out[i] -= cw[i] * out[i + 1]


_block_thomas_nb = njit(cache=True)(_block_thomas_core)


def block_tridiag_solve_numba(main, off, starts, lens, rhs):
    out = rhs.copy()
    cw = np.empty(main.shape[0])
    _block_thomas_nb(main, off, starts, lens, out, cw)
    return out


def block_tridiag_solve_numpy(main, off, starts, lens, rhs):
    total = main.shape[0]
    ab = np.zeros((3, total))
    ab[1] = main
    ab[0, 1:] = off[:-1]
    ab[2, :-1] = off[:-1]
    return solve_banded((1, 1), ab, rhs)


def block_tridiag_matvec(main, off, x):
    """y = A x for the stacked symmetric-tridiagonal blocks (always numpy)."""
    y = main * x
    y[:-1] += off[:-1] * x[1:]
    y[1:] += off[:-1] * x[:-1]
    return y


# ----------------------------------------------------------------------
# Fused Poisson pass: gather the upper and lower band of every offset
# from the dense right-hand side, Thomas-solve both against the shared
# coefficient tables, and scatter into the dense solution.  One kernel
# touches main/off once for both bands, which matters at large N where
# the solve is memory-bound.

@njit(cache=True)
def _block_thomas2_nb(starts, lens, main, off, rhs, cw):
    for b in range(starts.shape[0]):
        s = starts[b]
        q = lens[b]
        piv = main[s]
        cw[s] = off[s] / piv if q > 1 else 0.0
        rhs[s, 0] = rhs[s, 0] / piv
        rhs[s, 1] = rhs[s, 1] / piv
        for i in range(s + 1, s + q):
            piv = main[i] - off[i - 1] * cw[i - 1]
            cw[i] = off[i] / piv
            rhs[i, 0] = (rhs[i, 0] - off[i - 1] * rhs[i - 1, 0]) / piv
            rhs[i, 1] = (rhs[i, 1] - off[i - 1] * rhs[i - 1, 1]) / piv
        for i in range(s + q - 2, s - 1, -1):
            rhs[i, 0] -= cw[i] * rhs[i + 1, 0]
            rhs[i, 1] -= cw[i] * rhs[i + 1, 1]


_tls = threading.local()


def _workspace(total):
    # reusable per-thread scratch; fresh large allocations fault in new
    # pages on every call, which dwarfs the arithmetic at large N
    store = getattr(_tls, "buffers", None)
    if store is None:
        store = _tls.buffers = {}
    buf = store.get(total)
    if buf is None:
        buf = store[total] = (np.empty((total, 2)), np.empty(total))
    return buf


def _gather_bands(P, n, lens, rhs):
    flat = P.reshape(-1)
    q0 = int(lens[0])
    diag0 = flat[:: n + 1]
    p0 = diag0 - diag0.mean()  # recenter onto the range of the deflated block
    rhs[:q0, 0] = p0[:q0]
    rhs[:q0, 1] = p0[:q0]
    pos = q0
    for m in range(1, n):
        qq = n - m
        rhs[pos:pos + qq, 0] = flat[m:: n + 1][:qq]
        rhs[pos:pos + qq, 1] = flat[m * n:: n + 1][:qq]
        pos += qq
    return rhs


def _scatter_bands(sol, n, lens, like):
    W = np.zeros_like(like)
    flat = W.reshape(-1)
    q0 = int(lens[0])
    w0 = np.zeros(n)
    w0[:q0] = sol[:q0, 0]
    w0 -= w0.mean()
    flat[:: n + 1] = w0
    pos = q0
    for m in range(1, n):
        qq = n - m
        flat[m:: n + 1][:qq] = sol[pos:pos + qq, 0]
        flat[m * n:: n + 1][:qq] = sol[pos:pos + qq, 1]
        pos += qq
    return W


def poisson_fused_numba(P, n, starts, lens, main, off):
    rhs, cw = _workspace(main.shape[0])
    _gather_bands(P, n, lens, rhs)
    _block_thomas2_nb(starts, lens, main, off, rhs, cw)
    return _scatter_bands(rhs, n, lens, P)


def poisson_fused_numpy(P, n, starts, lens, main, off):
    rhs, _ = _workspace(main.shape[0])
    _gather_bands(P, n, lens, rhs)
    sol = block_tridiag_solve_numpy(main, off, starts, lens, rhs)
    return _scatter_bands(sol, n, lens, P)


# ----------------------------------------------------------------------
# Cyclic Jacobi sweeps.  Rotations are applied two-sided so the iterate
# stays symmetric to round-off; V accumulates eigenvectors as columns.

def _offdiag_frob(A):
    n = A.shape[0]
    acc = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            acc += A[p, q] * A[p, q]
    return np.sqrt(2.0 * acc)


_offdiag_frob_nb = njit(cache=True)(_offdiag_frob)


@njit(cache=True)
def _jacobi_nb(A, V, tol_off, max_sweeps):
    n = A.shape[0]
    sweeps = 0
    while sweeps < max_sweeps:
        off = _offdiag_frob_nb(A)
        if off <= tol_off:
            return sweeps, off, True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
        sweeps += 1
    return sweeps, _offdiag_frob_nb(A), False


def jacobi_numba(A, V, tol_off, max_sweeps):
    return _jacobi_nb(A, V, tol_off, max_sweeps)


def jacobi_numpy(A, V, tol_off, max_sweeps):
    n = A.shape[0]
    sweeps = 0
    while sweeps < max_sweeps:
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off <= tol_off:
            return sweeps, off, True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        sweeps += 1
    off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
    return sweeps, off, False


IMPLS = {
    "numba": {
        "thomas": thomas_numba,
        "block_tridiag_solve": block_tridiag_solve_numba,
        "poisson_fused": poisson_fused_numba,
        "jacobi": jacobi_numba,
    },
    "numpy": {
        "thomas": thomas_numpy,
        "block_tridiag_solve": block_tridiag_solve_numpy,
        "poisson_fused": poisson_fused_numpy,
        "jacobi": jacobi_numpy,
    },
}

_active = IMPLS[backend()]
thomas = _active["thomas"]
block_tridiag_solve = _active["block_tridiag_solve"]
poisson_fused = _active["poisson_fused"]
jacobi = _active["jacobi"]
