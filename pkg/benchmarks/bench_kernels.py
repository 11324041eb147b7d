"""Time the compiled graph kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py --sizes 50 100 200 --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from edmnet import kernels
from edmnet.network import csr_from_adjacency


def random_csr(n: int, avg_degree: float, seed: int):
    rng = np.random.default_rng(seed)
    p = min(1.0, avg_degree / max(n - 1, 1))
    upper = np.triu(rng.random((n, n)) < p, 1)
    return csr_from_adjacency(upper | upper.T)


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--degree", type=float, default=6.0, help="expected average degree")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = kernels.implementations()
    if "cython" not in impls:
        print("compiled kernels not built; only the fallback is timed")
    names = list(impls)
    header = f"{'kernel':<20}{'n':>6}" + "".join(f"{b + ' (ms)':>16}" for b in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for n in args.sizes:
        indptr, indices = random_csr(n, args.degree, args.seed + n)
        for kernel in ("bfs_distances", "vertex_betweenness", "edge_betweenness"):
            ms = [1e3 * best_of(lambda: getattr(impls[b], kernel)(indptr, indices, n), args.repeat) for b in names]
            line = f"{kernel:<20}{n:>6}" + "".join(f"{t:>16.2f}" for t in ms)
            if len(ms) == 2:
                line += f"{ms[0] / ms[1]:>9.1f}x"
            print(line)


if __name__ == "__main__":
    main()
