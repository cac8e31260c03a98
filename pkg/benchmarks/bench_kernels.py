"""Time the numba and numpy forms of each kernel on the same inputs.

    python3 benchmarks/bench_kernels.py --n 200000 --repeat 5

Prints one row per kernel with the best-of-``repeat`` time for each backend
and the speedup. End-to-end rows run ``la_decompose`` and the simulated
multiply with the dispatcher switched to each backend in turn.
"""

from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from arrowspmm import kernels
from arrowspmm.arrangement import Forest
from arrowspmm.decomposition import la_decompose
from arrowspmm.generators import power_law, random_tree
from arrowspmm.sim import decomposition_multiply_sim


def best(fn, repeat: int) -> float:
    fn()  # warm-up; also triggers JIT compilation
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_cases(n: int, k: int, seed: int):
    g = power_law(n, 2.0, seed)
    x = np.random.default_rng(seed).standard_normal((n, k))
    rows = g.row_indices()
    upper = rows < g.col_indices
    u, v = rows[upper], g.col_indices[upper]
    w = np.random.default_rng(seed).random(u.shape[0])
    t = random_tree(n, seed)
    f = Forest.from_tree_matrix(t)
    ip, ix = g.row_offsets, g.col_indices
    tp, tx = t.row_offsets, t.col_indices
    return {
        "csr_spmm": (
            lambda: kernels._csr_spmm_loop(ip, ix, g.values, x),
            lambda: kernels._csr_spmm_numpy(ip, ix, g.values, x),
        ),
        "kruskal_forest": (
            lambda: kernels._kruskal_loop(n, u, v, w),
            lambda: kernels._kruskal_numpy(n, u, v, w),
        ),
        "bfs_forest": (
            lambda: kernels._bfs_forest_loop(n, ip, ix),
            lambda: kernels._bfs_forest_numpy(n, ip, ix),
        ),
        "smallest_first": (
            lambda: kernels._smallest_first_loop(f.parent, f.order, f.roots),
            lambda: kernels._smallest_first_numpy(f.parent, f.depth, f.order, f.roots),
        ),
        "tree_centroid": (
            lambda: kernels._tree_centroid_loop(n, tp, tx),
            lambda: kernels._tree_centroid_numpy(n, tp, tx),
        ),
    }


def end_to_end(n: int, k: int, seed: int, use_jit: bool):
    g = power_law(n, 2.0, seed)
    x = np.random.default_rng(seed).standard_normal((n, k))
    b = max(2, n // 64)

    def run():
        saved = kernels.USE_JIT
        kernels.USE_JIT = use_jit
        try:
            d = la_decompose(g, b, "random-forest", seed)
            decomposition_multiply_sim(d, x)
        finally:
            kernels.USE_JIT = saved

    return run


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--k", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        ap.error("numba is not installed; nothing to compare")

    rows = []
    for name, (jit_fn, np_fn) in kernel_cases(args.n, args.k, args.seed).items():
        rows.append((name, best(jit_fn, args.repeat), best(np_fn, args.repeat)))
    rows.append(
        (
            "la_decompose+sim",
            best(end_to_end(args.n, args.k, args.seed, True), args.repeat),
            best(end_to_end(args.n, args.k, args.seed, False), args.repeat),
        )
    )

    if args.json:
        payload = [{"kernel": r[0], "numba_s": r[1], "numpy_s": r[2]} for r in rows]
        print(json.dumps({"n": args.n, "k": args.k, "results": payload}, indent=2))
        return 0
    print(f"n={args.n} k={args.k} best of {args.repeat}")
    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'numpy/numba':>13}")
    for name, tj, tn in rows:
        print(f"{name:<18}{tj * 1e3:>12.2f}{tn * 1e3:>12.2f}{tn / tj:>13.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
