#!/usr/bin/env python3
"""Benchmark the compiled tube kernel against the pure-Python fallback.

Both backends run the identical algorithm (same operation order), so the
values must agree bit-for-bit; the point of this script is the speed ratio.

    python benchmarks/bench_tv.py [--sizes 1000,10000,100000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from truvar import _kernels_py

try:
    from truvar import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def brownian_values(n: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    steps = rng.standard_normal(n) * (1.0 / n) ** 0.5
    return np.concatenate([[0.0], np.cumsum(steps)])


def time_backend(fn, xs, c, repeats: int) -> tuple:
    best = float("inf")
    value = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn(xs, c)
        best = min(best, time.perf_counter() - t0)
    return best, value


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1000,10000,100000,1000000")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--c", type=float, default=0.05)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _kernels_c is None:
        print("compiled kernel not built; only timing the pure-Python backend")
    print(f"{'n':>9} {'python':>12} {'compiled':>12} {'speedup':>9}  agreement")
    for n in sizes:
        xs = brownian_values(n, seed=n)
        t_py, v_py = time_backend(_kernels_py.tube_tv, xs, args.c, args.repeats)
        if _kernels_c is None:
            print(f"{n:>9} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
            continue
        t_c, v_c = time_backend(_kernels_c.tube_tv, xs, args.c, args.repeats)
        agree = "bit-exact" if v_py == v_c else f"DIFFER ({v_py!r} vs {v_c!r})"
        print(f"{n:>9} {t_py * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms {t_py / t_c:>8.1f}x  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
