#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run: python benchmarks/bench_kernels.py [--dim N] [--grid-points G]
The numba path is warmed once before timing so compilation is excluded.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from vecq import kernels


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=1_000_000)
    ap.add_argument("--grid-points", type=int, default=500)
    ap.add_argument("--bits", type=int, default=2)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    w = rng.standard_normal(args.dim)
    grid = np.arange(1, args.grid_points + 1) * (3.0 / args.grid_points)
    k = args.bits

    rows = []
    if kernels.HAS_NUMBA:
        # warm the JIT so compile time stays out of the timings
        kernels._steer_numba(w[:64], 1.0, k)
        kernels._sweep_numba(w[:64], grid[:4], k)
        kernels._moments_numba(w[:64])

    cases = [
        ("steer", (w, 0.9957, k), kernels._steer_numpy,
         kernels._steer_numba if kernels.HAS_NUMBA else None),
        ("moments", (w,), kernels._moments_numpy,
         kernels._moments_numba if kernels.HAS_NUMBA else None),
        ("orientation_sweep", (w, grid, k), kernels._sweep_numpy,
         kernels._sweep_numba if kernels.HAS_NUMBA else None),
    ]
    print(f"dim={args.dim} grid_points={args.grid_points} bits={k}")
    print(f"{'kernel':<20} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, call_args, fn_np, fn_nb in cases:
        t_np, out_np = time_call(fn_np, *call_args)
        if fn_nb is None:
            print(f"{name:<20} {t_np:>9.4f}s {'n/a':>10} {'':>8}")
            continue
        t_nb, out_nb = time_call(fn_nb, *call_args)
        if not np.allclose(np.asarray(out_np), np.asarray(out_nb), atol=1e-10):
            raise AssertionError(f"{name}: backends disagree")
        print(f"{name:<20} {t_np:>9.4f}s {t_nb:>9.4f}s {t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
