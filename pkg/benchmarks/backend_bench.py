"""Compare the numba kernels against the pure-numpy fallback.

Runs each kernel workload in a subprocess with OBJSEARCH_BACKEND forced to
one backend at a time (the choice is made at import), then prints a timing
table. Usage:

    python3 benchmarks/backend_bench.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from objsearch._kernels import USING_NUMBA, dijkstra_field, astar_point, path_dp

rng = np.random.default_rng(0)
grid = (rng.random((200, 200)) > 0.2).astype(np.uint8)
grid[0, 0] = grid[-1, -1] = 1

# warm-up so numba compilation is not timed
dijkstra_field(grid, 0, 0)
astar_point(grid, 0, 0, 199, 199)
dist = rng.random((13, 13)) + 0.1
dist = (dist + dist.T) / 2
np.fill_diagonal(dist, 0.0)
path_dp(dist, rng.random(12), True)

repeat = int(sys.argv[1])
results = {"backend": "numba" if USING_NUMBA else "numpy"}

t0 = time.perf_counter()
for _ in range(repeat):
    for s in range(8):
        dijkstra_field(grid, s, s)
results["dijkstra_field (8 sources, 200x200)"] = (time.perf_counter() - t0) / repeat

t0 = time.perf_counter()
for _ in range(repeat):
    for s in range(8):
        astar_point(grid, s, 0, 199, 199 - s)
results["astar_point (8 queries, 200x200)"] = (time.perf_counter() - t0) / repeat

dist16 = rng.random((17, 17)) + 0.1
dist16 = (dist16 + dist16.T) / 2
np.fill_diagonal(dist16, 0.0)
w16 = rng.random(16)
t0 = time.perf_counter()
for _ in range(repeat):
    path_dp(dist16, w16, True)
results["path_dp (k=16 weighted latency)"] = (time.perf_counter() - t0) / repeat

t0 = time.perf_counter()
for _ in range(repeat):
    path_dp(dist16, np.ones(16), False)
results["path_dp (k=16 open tour)"] = (time.perf_counter() - t0) / repeat

print(json.dumps(results))
"""


def run_backend(backend, repeat):
    env = dict(os.environ, OBJSEARCH_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    results = {b: run_backend(b, args.repeat) for b in ("numba", "numpy")}
    for b in results:
        if results[b].pop("backend") != b:
            print(f"warning: backend {b!r} unavailable, measured fallback")

    names = [k for k in results["numba"]]
    width = max(len(n) for n in names)
    print(f"{'workload':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for n in names:
        tn = results["numba"][n]
        tp = results["numpy"][n]
        print(f"{n:<{width}}  {tn:>9.4f}s  {tp:>9.4f}s  {tp / tn:>7.1f}x")


if __name__ == "__main__":
    main()
