"""Time the compiled and pure-Python kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import math
import time

import numpy as np

from sceneqa import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    backends = _kernels.available_backends()

    centers = rng.uniform(-50, 50, size=(60, 2))
    grid = rng.normal(size=(180, 180, 64))
    rects = [(rng.uniform(10, 170), rng.uniform(10, 170), rng.uniform(0.5, 8), rng.uniform(0.5, 8),
              rng.uniform(-math.pi, math.pi)) for _ in range(200)]

    def relations(mod):
        return lambda: [mod.relation_matrix(centers, 0.6, 0.8) for _ in range(20)]

    def pooling(mod, mode):
        return lambda: [mod.pool_rotated(grid, cx, cy, hx, hy, math.cos(y), math.sin(y), mode)
                        for cx, cy, hx, hy, y in rects]

    cases = {
        "relation_matrix 60 nodes x20": relations,
        "pool_rotated mean 200 boxes d=64": lambda m: pooling(m, _kernels.MEAN),
        "pool_rotated max 200 boxes d=64": lambda m: pooling(m, _kernels.MAX),
    }
    names = sorted(backends)
    print(f"{'kernel':36s}" + "".join(f"{n:>12s}" for n in names) + "     speedup")
    for label, make in cases.items():
        t = {n: best_of(make(backends[n]), args.repeat) for n in names}
        speedup = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{label:36s}" + "".join(f"{t[n] * 1e3:10.2f}ms" for n in names) + f"  {speedup:9.1f}x")


if __name__ == "__main__":
    main()
