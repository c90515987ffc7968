"""Compare the compiled and numpy grid-density kernels.

Usage: python benchmarks/bench_kernels.py [--units 616] [--per-dim 10] [--repeat 3]
"""
import argparse
import time

import numpy as np

from netpscore import kernels
from netpscore.grid import grid_from_bounds


def make_problem(n_units, per_dim, K=4, seed=0):
    rng = np.random.default_rng(seed)
    grid = grid_from_bounds([(-1.6, 1.6)] * K, per_dim).points
    means = rng.normal(scale=0.5, size=(K, n_units, K))
    A = rng.normal(size=(K, K))
    chol = np.linalg.cholesky(A @ A.T / K + 0.5 * np.eye(K))
    return grid, means, chol


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--units", type=int, default=616)
    ap.add_argument("--per-dim", type=int, nargs="+", default=[4, 6, 10])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    print(f"backends available: {', '.join(kernels.BACKENDS)} (default {kernels.BACKEND})")
    print(f"{'grid':>8} {'units':>6} " + " ".join(f"{b:>10}" for b in kernels.BACKENDS)
          + "   max abs diff")
    for per_dim in args.per_dim:
        grid, means, chol = make_problem(args.units, per_dim)
        results = {}
        for b in kernels.BACKENDS:
            results[b] = best_of(
                lambda: kernels.density_gram(grid, means, chol, args.threads, backend=b),
                args.repeat)
        outs = [results[b][1] for b in kernels.BACKENDS]
        diff = max(np.abs(outs[0][k] - o[k]).max() for o in outs[1:] for k in (0, 1)) \
            if len(outs) > 1 else 0.0
        print(f"{len(grid):>8} {args.units:>6} "
              + " ".join(f"{results[b][0]:>9.3f}s" for b in kernels.BACKENDS)
              + f"   {diff:.2e}")


if __name__ == "__main__":
    main()
