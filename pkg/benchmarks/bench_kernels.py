#!/usr/bin/env python3
"""Benchmark the jitted loop kernels against the pure-Python fallback.

Usage:
    python benchmarks/bench_kernels.py [--steps N] [--repeats R]

The same comparison applies package-wide by setting PACESIM_NO_NUMBA=1,
which routes every simulation through the fallback path.
"""

import argparse
import time

import numpy as np

from pacesim._accel import NUMBA_ACTIVE
from pacesim._kernels import (_arrayed_loop_py, _pll_loop_py, arrayed_loop,
                              pll_loop)


def timeit(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=6656,
                        help="loop steps per run (default: one design phase)")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    dt = 1e-6 / 1024
    noise1 = (rng.standard_normal(args.steps)
              + 1j * rng.standard_normal(args.steps)) * 1e-1
    noise3 = (rng.standard_normal((3, args.steps))
              + 1j * rng.standard_normal((3, args.steps))) * 1e-1
    amps = np.array([1.0, 0.7, 0.5])
    gains = 2 * np.pi / 1e-6 / amps

    one_args = (noise1, dt, np.pi * 5e6, 4e6, 2 * np.pi * 5e6, 1.0, 0.0,
                False)
    arr_args = (noise3, dt, gains, amps, np.pi * 5e6 * 2 * np.pi * 1e6 / 1.74,
                4e6, 2 * np.pi * 5e6, 1e-6)

    if NUMBA_ACTIVE:
        pll_loop(*one_args)       # compile outside the timed region
        arrayed_loop(*arr_args)

    rows = []
    for name, fast, pure, fargs in (
            ("single-loop recovery", pll_loop, _pll_loop_py, one_args),
            ("arrayed recovery", arrayed_loop, _arrayed_loop_py, arr_args)):
        t_pure = timeit(pure, fargs, args.repeats)
        t_fast = timeit(fast, fargs, args.repeats)
        rows.append((name, t_pure, t_fast))

    label = "numba njit" if NUMBA_ACTIVE else "fallback (numba disabled)"
    print(f"steps per run: {args.steps}, repeats: {args.repeats}, "
          f"active path: {label}")
    print(f"{'kernel':<24} {'pure python':>12} {'jitted':>12} {'speedup':>9}")
    for name, t_pure, t_fast in rows:
        print(f"{name:<24} {t_pure * 1e3:>10.2f}ms {t_fast * 1e3:>10.2f}ms "
              f"{t_pure / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
