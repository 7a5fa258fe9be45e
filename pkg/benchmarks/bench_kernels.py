"""Time the compiled and numpy kernel backends on the same inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from dragoon import kernels
from dragoon.geo import EARTH_RADIUS_KM
from dragoon.simulator import synthetic_topology


def cases(n_nodes=200, n_points=60):
    t = synthetic_topology(n_nodes, seed=0, lat_range=(30.0, 65.0), lon_range=(-15.0, 40.0), min_separation_km=20.0)
    indptr, indices = t.csr()
    hops = kernels.bfs_hops(indptr, indices, len(t))
    landmarks = np.arange(0, len(t), len(t) // 10, dtype=np.int64)[:10]
    rng = np.random.default_rng(0)
    lats, lons = rng.uniform(45, 50, n_points), rng.uniform(5, 12, n_points)
    return {
        "bfs_hops": lambda k: k.bfs_hops(indptr, indices, len(t)),
        "assign_nearest": lambda k: k.assign_nearest(hops, landmarks),
        "kcenter_cost": lambda k: k.kcenter_cost(hops, landmarks),
        "gc_mean_distance": lambda k: k.gc_mean_distance(47.5, 8.5, lats, lons, EARTH_RADIUS_KM),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(sorted(backends))}")
    print(f"{'kernel':<18}" + "".join(f"{name + ' (us)':>16}" for name in sorted(backends)) + f"{'speedup':>10}")
    for name, fn in cases().items():
        times = {}
        for bname, mod in sorted(backends.items()):
            timer = timeit.Timer(lambda: fn(mod))
            loops, _ = timer.autorange()
            times[bname] = min(timer.repeat(args.repeat, loops)) / loops * 1e6
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<18}" + "".join(f"{times[b]:>16.1f}" for b in sorted(times)) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
