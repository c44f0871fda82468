"""Benchmark the compiled kernels against the pure numpy fallback.

Runs each hot kernel on a representative workload with both backends and
prints the timing ratio.  Usage:

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import importlib
import time

import numpy as np

from platoonrisk._kernels import _ref
from platoonrisk.graphs import build_topology, laplacian

try:
    _core = importlib.import_module("platoonrisk._kernels._core")
except ImportError:
    _core = None


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sdde(mod):
    n, n_traj, m, nsteps = 11, 32, 10, 4000
    L = laplacian(build_topology("complete", n))
    rng = np.random.default_rng(0)
    u = np.zeros((n_traj, n))
    v = np.zeros((n_traj, n))
    ubuf = np.zeros((n_traj, m, n))
    vbuf = np.zeros((n_traj, m, n))
    noise = rng.standard_normal((n_traj, nsteps, n))
    samples = np.empty((n_traj, nsteps // 100, n - 1))

    def run():
        u.fill(0.0)
        v.fill(0.0)
        ubuf.fill(0.0)
        vbuf.fill(0.0)
        mod.sdde_chunk(L, 1.0 / 3.0, 0.001, 0.001, u, v, ubuf, vbuf, noise,
                       0, nsteps, 0, 100, samples, 0, 1.01, 1e12)

    return run


def bench_trapezoid(mod):
    return lambda: mod.integrand_trapezoid(0.11, 1.0 / 300.0, 1e-4, 1e3)


def bench_jacobi(mod):
    rng = np.random.default_rng(1)
    A = rng.standard_normal((40, 40))
    A = A + A.T
    return lambda: mod.jacobi_eigh(A)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    cases = [("sdde_chunk (32 traj x 4000 steps, n=11)", bench_sdde),
             ("integrand_trapezoid (1e7 points)", bench_trapezoid),
             ("jacobi_eigh (40 x 40)", bench_jacobi)]
    print(f"{'kernel':45s} {'pure (s)':>10s} {'compiled (s)':>13s} {'speedup':>8s}")
    for label, setup in cases:
        t_ref = time_call(setup(_ref), args.repeats)
        if _core is None:
            print(f"{label:45s} {t_ref:10.4f} {'n/a':>13s} {'n/a':>8s}")
            continue
        t_core = time_call(setup(_core), args.repeats)
        print(f"{label:45s} {t_ref:10.4f} {t_core:13.4f} {t_ref / t_core:7.1f}x")
    if _core is None:
        print("compiled extension not available; showing pure backend only")


if __name__ == "__main__":
    main()
