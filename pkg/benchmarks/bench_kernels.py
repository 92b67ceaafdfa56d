"""Time the numba kernels against the pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5] [--nodes 3000]
"""

import argparse
import time

import numpy as np

from signed_ego import _kernels
from signed_ego.signing import Sign
from signed_ego.triads import SignedGraph


def random_graph(n, avg_degree, seed=0):
    rng = np.random.default_rng(seed)
    m = n * avg_degree // 2
    u = rng.integers(0, n, 2 * m)
    v = rng.integers(0, n, 2 * m)
    keep = u != v
    pairs = {(min(a, b), max(a, b)) for a, b in zip(u[keep], v[keep])}
    nodes = [f"v{i:06d}" for i in range(n)]
    g = SignedGraph(nodes)
    for a, b in sorted(pairs)[:m]:
        g.edges[(nodes[a], nodes[b])] = Sign.POSITIVE if rng.random() < 0.6 else Sign.NEGATIVE
    return g


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--nodes", type=int, default=3000)
    ap.add_argument("--degree", type=int, default=40)
    ap.add_argument("--points", type=int, default=2000)
    args = ap.parse_args()

    if not _kernels.HAVE_NUMBA:
        print("numba not installed; only the numpy backend is available")

    indptr, indices, edge_ids, _ = random_graph(args.nodes, args.degree).to_arrays()
    rng = np.random.default_rng(1)
    scale = max(1, args.points // 150)
    x = np.sort(np.log(np.concatenate([rng.lognormal(np.log(c), 0.2, k * scale)
                                       for c, k in ((300, 2), (100, 3), (30, 10), (9, 35), (2.7, 100))])))
    seeds = np.unique(x)

    rows = []
    t_np, tri_np = best_of(lambda: _kernels.triangle_edges_numpy(indptr, indices, edge_ids), args.repeat)
    rows.append(("triangles", "numpy", t_np, len(tri_np)))
    if _kernels.HAVE_NUMBA:
        _kernels.triangle_edges_numba(indptr, indices, edge_ids)  # compile
        t_nb, tri_nb = best_of(lambda: _kernels.triangle_edges_numba(indptr, indices, edge_ids), args.repeat)
        assert len(tri_nb) == len(tri_np)
        rows.append(("triangles", "numba", t_nb, len(tri_nb)))

    t_np, modes_np = best_of(lambda: _kernels.mean_shift_modes_numpy(x, seeds, 0.1, 1e-7, 500), args.repeat)
    rows.append(("mean shift", "numpy", t_np, len(seeds)))
    if _kernels.HAVE_NUMBA:
        _kernels.mean_shift_modes_numba(x, seeds, 0.1, 1e-7, 500)
        t_nb, modes_nb = best_of(lambda: _kernels.mean_shift_modes_numba(x, seeds, 0.1, 1e-7, 500), args.repeat)
        assert np.array_equal(modes_np, modes_nb)
        rows.append(("mean shift", "numba", t_nb, len(seeds)))

    print(f"graph: {args.nodes} nodes, {len(indices)} edges; mean shift: {len(x)} points")
    print(f"{'kernel':<12}{'backend':<9}{'best (ms)':>11}{'size':>10}")
    for kernel, backend, secs, size in rows:
        print(f"{kernel:<12}{backend:<9}{1000 * secs:>11.2f}{size:>10}")
    for kernel in ("triangles", "mean shift"):
        t = {b: s for k, b, s, _ in rows if k == kernel}
        if "numba" in t:
            print(f"{kernel}: numba speedup x{t['numpy'] / t['numba']:.1f}")


if __name__ == "__main__":
    main()
