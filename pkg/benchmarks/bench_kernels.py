"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs the batched Poisson band solve, the single Thomas solve, and cyclic
Jacobi on both backends and prints a timing table with scaling ratios.
Both implementations are imported directly, so the ISOFLOW_NO_NUMBA flag
does not need to be set to compare them.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from isoflow import _accel
from isoflow.cli import random_tridiagonal
from isoflow.quantization import band_coefficients, build_generators


def timeit(fn, reps):
    best = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best.append(time.perf_counter() - t0)
    return float(np.median(best))


def bench_poisson(sizes, reps):
    print("\nbatched band solve (one full Poisson pass over all offsets)")
    print(f"{'N':>6} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>9}")
    meds = {}
    for n in sizes:
        lap = band_coefficients(build_generators(n))
        rng = np.random.default_rng(0)
        rhs = rng.standard_normal(lap._sol_total)
        args = (lap._sol_main, lap._sol_off, lap._sol_starts, lap._sol_lens, rhs)
        impls = {k: _accel.IMPLS[k]["block_tridiag_solve"] for k in ("numba", "numpy")}
        for f in impls.values():
            f(*args)  # warm (JIT compile / first-touch)
        t = {k: timeit(lambda f=f: f(*args), reps) for k, f in impls.items()}
        meds[n] = t
        print(f"{n:>6} {t['numba'] * 1e3:>12.3f} {t['numpy'] * 1e3:>12.3f} "
              f"{t['numpy'] / t['numba']:>9.1f}x")
    ns = sorted(meds)
    for a, b in zip(ns, ns[1:]):
        r = meds[b]["numba"] / meds[a]["numba"]
        print(f"  numba scaling t({b})/t({a}) = {r:.2f} (O(N^2) predicts 4)")


def bench_thomas(sizes, reps):
    print("\nsingle tridiagonal Thomas solve")
    print(f"{'n':>8} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>9}")
    for n in sizes:
        rng = np.random.default_rng(1)
        main = rng.uniform(2.0, 3.0, n)
        sub = rng.uniform(-0.5, 0.5, n - 1)
        sup = rng.uniform(-0.5, 0.5, n - 1)
        rhs = rng.standard_normal(n)
        impls = {k: _accel.IMPLS[k]["thomas"] for k in ("numba", "numpy")}
        for f in impls.values():
            f(sub, main, sup, rhs)
        t = {k: timeit(lambda f=f: f(sub, main, sup, rhs), reps) for k, f in impls.items()}
        print(f"{n:>8} {t['numba'] * 1e3:>12.4f} {t['numpy'] * 1e3:>12.4f} "
              f"{t['numpy'] / t['numba']:>9.1f}x")


def bench_jacobi(sizes, reps):
    print("\ncyclic Jacobi eigensolve (symmetric tridiagonal input)")
    print(f"{'n':>6} {'numba [s]':>12} {'numpy [s]':>12} {'speedup':>9}")
    for n in sizes:
        S = random_tridiagonal(n, 7)
        tol = 1e-13 * np.linalg.norm(S)

        def run(f):
            A = S.copy()
            V = np.eye(n)
            _, _, ok = f(A, V, tol, 30)
            assert ok

        impls = {k: _accel.IMPLS[k]["jacobi"] for k in ("numba", "numpy")}
        run(impls["numba"])  # warm the JIT
        t = {k: timeit(lambda f=f: run(f), reps) for k, f in impls.items()}
        print(f"{n:>6} {t['numba']:>12.4f} {t['numpy']:>12.4f} "
              f"{t['numpy'] / t['numba']:>9.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="smaller sizes, fewer reps")
    args = ap.parse_args()
    print(f"active backend: {_accel.backend()}")
    if args.quick:
        bench_poisson((128, 256), reps=5)
        bench_thomas((1_000, 10_000), reps=5)
        bench_jacobi((32, 64), reps=3)
    else:
        bench_poisson((128, 256, 512, 1024), reps=20)
        bench_thomas((1_000, 10_000, 100_000), reps=20)
        bench_jacobi((32, 64, 128, 256), reps=3)


if __name__ == "__main__":
    main()
