#!/usr/bin/env python3
"""Benchmark the compiled simplex kernel against the pure-Python fallback.

Times both kernels on identical LP relaxations of generated instances and on
a branch-and-bound-style workload (the root LP re-solved under many random
bound tightenings, which is what the MIP solver actually does).

Usage:
    python3 benchmarks/bench_simplex.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from backdoor_mip.lp import DenseLp, kernel_py
from backdoor_mip.mip import GispConfig, generate_gisp

try:
    from backdoor_mip.lp import _simplex_core
except ImportError:
    _simplex_core = None


def time_kernel(kernel, problems, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for A, senses, b, c, lo, up in problems:
            kernel.solve_kernel(A, senses, b, c, lo, up, 100000)
        best = min(best, time.perf_counter() - t0)
    return best


def build_problems(num_instances, num_vertices, tighten_per_instance, seed=0):
    """Root LPs plus randomly tightened variants, mimicking tree search."""
    rng = np.random.default_rng(seed)
    problems = []
    for s in range(num_instances):
        inst = generate_gisp(
            GispConfig(num_vertices=num_vertices, edge_probability=0.4, seed=seed * 1000 + s,
                       removable_fraction=0.25)
        )
        lp = DenseLp(inst)
        problems.append((lp.A, lp.senses, lp.b, lp.c, lp.lower.copy(), lp.upper.copy()))
        for _ in range(tighten_per_instance):
            lo, up = lp.lower.copy(), lp.upper.copy()
            for var in rng.choice(lp.n, size=min(4, lp.n), replace=False):
                if rng.random() < 0.5:
                    lo[var] = 1.0
                else:
                    up[var] = 0.0
            problems.append((lp.A, lp.senses, lp.b, lp.c, lo, up))
    return problems


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (best is kept)")
    args = parser.parse_args()

    if _simplex_core is None:
        print("compiled kernel not available; build the package first (pip install -e .)")
        return

    scenarios = [
        ("small LPs (14 vertices, 40 variants)", build_problems(4, 14, 10)),
        ("medium LPs (22 vertices, 40 variants)", build_problems(4, 22, 10)),
        ("large LPs (32 vertices, 40 variants)", build_problems(4, 32, 10)),
    ]
    print(f"{'scenario':<40} {'python':>10} {'cython':>10} {'speedup':>9}")
    print("-" * 72)
    for name, problems in scenarios:
        t_py = time_kernel(kernel_py, problems, args.repeats)
        t_cy = time_kernel(_simplex_core, problems, args.repeats)
        print(f"{name:<40} {t_py * 1e3:>8.1f}ms {t_cy * 1e3:>8.1f}ms {t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
