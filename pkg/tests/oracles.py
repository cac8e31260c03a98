"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math

import mpmath
import networkx as nx
import numpy as np

from arrowspmm.sparse import SparseSymMatrix


def dense_triple_loop(a: SparseSymMatrix, x: np.ndarray) -> np.ndarray:
    dense = a.to_dense()
    n, k = x.shape
    y = np.zeros((n, k))
    for i in range(n):
        for j in np.flatnonzero(dense[i]):
            y[i] += dense[i, j] * x[j]
    return y


def to_networkx(a: SparseSymMatrix) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(a.n))
    u, v = a.upper_edges()
    g.add_edges_from(zip(u.tolist(), v.tolist()))
    return g


def prufer_trees(n: int):
    """Every labelled tree on ``n`` vertices as an edge array (n >= 2)."""
    if n == 2:
        yield np.array([[0, 1]])
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        g = nx.from_prufer_sequence(list(seq))
        yield np.array(sorted(g.edges()), dtype=np.int64)


def tree_matrix(edges: np.ndarray, n: int) -> SparseSymMatrix:
    return SparseSymMatrix.from_edges(n, edges[:, 0], edges[:, 1])


def mla_by_permutations(a: SparseSymMatrix) -> int:
    u, v = a.upper_edges()
    best = math.inf
    for perm in itertools.permutations(range(a.n)):
        p = np.array(perm)
        best = min(best, int(np.abs(p[u] - p[v]).sum()))
    return best


def survival_mp(n: int, alpha: float, x: int) -> float:
    """``(H_n - H_x) / H_n`` at 50 digits."""
    with mpmath.workdps(50):
        a = mpmath.mpf(alpha)
        hn = mpmath.fsum(mpmath.power(j, -a) for j in range(1, n + 1))
        hx = mpmath.fsum(mpmath.power(j, -a) for j in range(1, x + 1))
        return float((hn - hx) / hn)


def zeta_mp(alpha: float) -> float:
    return float(mpmath.zeta(alpha))


def binomial_depth(p: int) -> int:
    """Dependent rounds of a binomial broadcast: smallest r with 2^r >= p."""
    r = 0
    while (1 << r) < p:
        r += 1
    return r


def band_lower_bound(n: int, x: int) -> int:
    return min(n - 1, math.ceil((x - 1) * (n - 1) / x) + 1)
