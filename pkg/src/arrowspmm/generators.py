"""Reproducible test graphs, all returned as unit-weight symmetric matrices."""

from __future__ import annotations

import heapq

import numpy as np

from .sparse import SparseSymMatrix
from .zipf import ZipfModel


def path(n: int) -> SparseSymMatrix:
    i = np.arange(max(n - 1, 0))
    return SparseSymMatrix.from_edges(n, i, i + 1)


def star(leaves: int) -> SparseSymMatrix:
    """Center 0 joined to ``1..leaves``."""
    return SparseSymMatrix.from_edges(leaves + 1, np.zeros(leaves, np.int64), np.arange(1, leaves + 1))


def cycle(n: int) -> SparseSymMatrix:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    i = np.arange(n)
    return SparseSymMatrix.from_edges(n, i, (i + 1) % n)


def complete_binary_tree(n: int) -> SparseSymMatrix:
    """Heap layout: the parent of ``v`` is ``(v - 1) // 2``."""
    child = np.arange(1, n)
    return SparseSymMatrix.from_edges(n, (child - 1) // 2, child)


def prufer_edges(seq, n: int) -> np.ndarray:
    """Edges of the labelled tree with Pruefer sequence ``seq``."""
    seq = [int(s) for s in seq]
    if n < 2:
        return np.empty((0, 2), np.int64)
    if len(seq) != n - 2:
        raise ValueError("Pruefer sequence must have length n - 2")
    degree = [1] * n
    for s in seq:
        degree[s] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for s in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, s))
        degree[s] -= 1
        if degree[s] == 1:
            heapq.heappush(leaves, s)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return np.array(edges, np.int64)


def tree_from_prufer(seq, n: int) -> SparseSymMatrix:
    e = prufer_edges(seq, n)
    return SparseSymMatrix.from_edges(n, e[:, 0], e[:, 1])


def random_tree(n: int, seed) -> SparseSymMatrix:
    """Uniform labelled tree on ``n`` vertices."""
    rng = np.random.default_rng(seed)
    return tree_from_prufer(rng.integers(0, n, max(n - 2, 0)), n)


def random_symmetric(n: int, avg_degree: float, seed, *, weighted: bool = True) -> SparseSymMatrix:
    """About ``n * avg_degree / 2`` uniform random edges; loops and repeats dropped.

    Weights are uniform in ``[0.5, 1.5)`` unless ``weighted=False``.
    """
    rng = np.random.default_rng(seed)
    m = int(round(n * avg_degree / 2))
    u = rng.integers(0, n, m)
    v = rng.integers(0, n, m)
    w = rng.uniform(0.5, 1.5, m) if weighted else np.ones(m)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keep = lo != hi
    _, first = np.unique(lo[keep] * n + hi[keep], return_index=True)
    return SparseSymMatrix.from_edges(n, lo[keep][first], hi[keep][first], w[keep][first])


def power_law(n: int, zipf_shape: float, seed) -> SparseSymMatrix:
    """Configuration model with truncated-Zipf degrees on ``1..n-1``.

    Stubs are shuffled and paired; self-loops and repeated pairs are dropped.
    """
    if n < 2:
        return SparseSymMatrix.empty(n)
    rng = np.random.default_rng(seed)
    deg = ZipfModel(n - 1, zipf_shape).sample(n, rng)
    stubs = np.repeat(np.arange(n), deg)
    rng.shuffle(stubs)
    stubs = stubs[: stubs.shape[0] // 2 * 2].reshape(-1, 2)
    lo, hi = stubs.min(axis=1), stubs.max(axis=1)
    keep = lo != hi
    pairs = np.unique(lo[keep] * n + hi[keep])
    return SparseSymMatrix.from_edges(n, pairs // n, pairs % n)


GENERATORS = {
    "path": lambda n, p, s: path(n),
    "star": lambda n, p, s: star(n - 1),
    "cycle": lambda n, p, s: cycle(n),
    "binary-tree": lambda n, p, s: complete_binary_tree(n),
    "random-tree": lambda n, p, s: random_tree(n, s),
    "random": lambda n, p, s: random_symmetric(n, 4.0 if p is None else p, s),
    "power-law": lambda n, p, s: power_law(n, 2.0 if p is None else p, s),
}


def generate(kind: str, n: int, param: float | None = None, seed=0) -> SparseSymMatrix:
    """Dispatch by name; ``param`` is the average degree or the Zipf shape."""
    try:
        make = GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown generator {kind!r}; choose from {sorted(GENERATORS)}") from None
    return make(n, param, seed)
