"""Linear arrangements: cost, band counts and three constructions.

* :func:`smallest_first_order` lays out a rooted forest in pre-order with
  children visited by increasing subtree size.
* :func:`separator_la` recursively places a separator first, then the
  remaining components in increasing size.
* :func:`random_forest_arrangement` draws a random minimum spanning forest
  and lays it out smallest-first.

:func:`brute_force_mla` enumerates all arrangements of tiny graphs and serves
as the test oracle for the heuristics.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .sparse import LinearArrangement, SparseSymMatrix

SeparatorOracle = Callable[[SparseSymMatrix], np.ndarray]

MAX_BRUTE_FORCE_N = 10


@dataclass(frozen=True, eq=False)
class Forest:
    """A rooted spanning forest.

    Every tree is rooted at its smallest vertex. Components are numbered by
    decreasing size, ties going to the component with the smaller root, so
    ``component_sizes`` is sorted in decreasing order and ``roots[c]`` is the
    root of component ``c``.
    """

    n: int
    parent: np.ndarray
    component_id: np.ndarray
    component_sizes: np.ndarray
    roots: np.ndarray
    depth: np.ndarray
    order: np.ndarray

    @classmethod
    def from_edges(cls, n: int, u, v) -> "Forest":
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        adj = SparseSymMatrix.from_edges(n, u, v)
        if adj.nnz != 2 * u.shape[0]:
            raise ValueError("edge list has self-loops or repeated edges")
        parent, depth, order, comp = kernels.bfs_forest(n, adj.row_offsets, adj.col_indices)
        ncomp = int(comp.max()) + 1 if n else 0
        if u.shape[0] != n - ncomp:
            raise ValueError("edge list contains a cycle")
        sizes = np.bincount(comp, minlength=ncomp)
        roots_by_comp = order[np.flatnonzero(parent[order] == order)]
        rank = np.lexsort((roots_by_comp, -sizes))
        relabel = np.empty(ncomp, np.int64)
        relabel[rank] = np.arange(ncomp)
        return cls(
            n=n,
            parent=parent,
            component_id=relabel[comp],
            component_sizes=sizes[rank],
            roots=roots_by_comp[rank],
            depth=depth,
            order=order,
        )

    @classmethod
    def from_tree_matrix(cls, a: SparseSymMatrix) -> "Forest":
        """Root a graph that is already a forest (no self-loops, no cycles)."""
        u, v = a.upper_edges()
        return cls.from_edges(a.n, u, v)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        child = np.flatnonzero(self.parent != np.arange(self.n))
        return self.parent[child], child

    def to_matrix(self) -> SparseSymMatrix:
        return SparseSymMatrix.from_edges(self.n, *self.edges())

    def subtree_sizes(self) -> np.ndarray:
        return kernels.subtree_sizes(self.parent, self.depth, self.order)


def _check_length(a: SparseSymMatrix, pi: LinearArrangement) -> None:
    if len(pi) != a.n:
        raise ValueError(f"arrangement has length {len(pi)}, matrix has n={a.n}")


def edge_distances(a: SparseSymMatrix, pi: LinearArrangement) -> np.ndarray:
    """``|pi(u) - pi(v)|`` for every undirected edge (self-loops give 0)."""
    _check_length(a, pi)
    u, v = a.upper_edges()
    return np.abs(pi.forward[u] - pi.forward[v])


def arrangement_cost(a: SparseSymMatrix, pi: LinearArrangement) -> int:
    """Sum of edge lengths under ``pi``, each undirected edge counted once."""
    return int(edge_distances(a, pi).sum())


def band_edge_count(a: SparseSymMatrix, pi: LinearArrangement, width: int) -> int:
    """Number of undirected edges no longer than ``width`` under ``pi``."""
    return int(np.count_nonzero(edge_distances(a, pi) <= width))


def smallest_first_order(forest: Forest) -> LinearArrangement:
    """Trees in decreasing size; each root first, child subtrees smallest first."""
    order = kernels.smallest_first(forest.parent, forest.depth, forest.order, forest.roots)
    return LinearArrangement.from_order(order)


def centroid_separator(tree: SparseSymMatrix, vertices=None) -> np.ndarray:
    """Single centroid vertex of a tree (smallest id among centroids).

    With ``vertices`` the induced subgraph on those vertices is used and the
    answer is given in the original labels.
    """
    if vertices is not None:
        vertices = np.asarray(vertices, dtype=np.int64)
        local = centroid_separator(tree.subgraph(vertices))
        return vertices[local]
    c = kernels.tree_centroid(tree.n, tree.row_offsets, tree.col_indices)
    if c < 0:
        raise ValueError("centroid separator needs a tree (connected, acyclic, no self-loops)")
    return np.array([c], dtype=np.int64)


def _pieces(sub: SparseSymMatrix, ids: np.ndarray, comp: np.ndarray, ncomp: int):
    """Split ``sub`` into its components, smallest first (ties by smallest id).

    Components of at most two vertices come back as bare id arrays; larger
    ones as ``(local matrix, global ids)`` pairs.
    """
    sizes = np.bincount(comp, minlength=ncomp)
    members = np.argsort(comp, kind="stable")
    starts = np.r_[0, np.cumsum(sizes)]
    within = np.empty(sub.n, np.int64)
    within[members] = np.arange(sub.n) - starts[comp[members]]

    rows = sub.row_indices()
    by_comp = np.argsort(comp[rows], kind="stable")
    ecount = np.bincount(comp[rows], minlength=ncomp)
    estarts = np.r_[0, np.cumsum(ecount)]
    erows = within[rows[by_comp]]
    ecols = within[sub.col_indices[by_comp]]
    evals = sub.values[by_comp]

    out = []
    for c in np.lexsort((np.arange(ncomp), sizes)):
        local = members[starts[c] : starts[c + 1]]
        if sizes[c] <= 2:
            out.append(ids[local])
            continue
        lo, hi = estarts[c], estarts[c + 1]
        offsets = np.zeros(sizes[c] + 1, np.int64)
        np.cumsum(np.bincount(erows[lo:hi], minlength=sizes[c]), out=offsets[1:])
        piece = SparseSymMatrix(int(sizes[c]), offsets, ecols[lo:hi], evals[lo:hi])
        out.append((piece, ids[local]))
    return out


def separator_la(a: SparseSymMatrix, oracle: SeparatorOracle = centroid_separator) -> LinearArrangement:
    """Separator recursion.

    Each connected piece with more than two vertices asks ``oracle`` for a
    separator, places it first (by id) and then recurses on the remaining
    components in increasing size. A disconnected piece is treated as having
    the empty separator. Pieces of one or two vertices are placed by id.

    Raises ``ValueError`` if the oracle leaves a component larger than
    ``ceil(2m/3)`` for a piece of ``m`` vertices.
    """
    placed: list[np.ndarray] = []
    stack: list = [(a, np.arange(a.n, dtype=np.int64))]
    while stack:
        item = stack.pop()
        if isinstance(item, np.ndarray):
            placed.append(item)
            continue
        sub, ids = item
        if sub.n <= 2:
            placed.append(ids)
            continue
        comp, ncomp = kernels.component_labels(sub.n, sub.row_offsets, sub.col_indices)
        if ncomp > 1:
            stack.extend(reversed(_pieces(sub, ids, comp, ncomp)))
            continue
        sep = np.unique(np.asarray(oracle(sub), dtype=np.int64))
        if sep.shape[0] == 0 or sep[0] < 0 or sep[-1] >= sub.n:
            raise ValueError("separator oracle returned an empty or out-of-range set")
        keep = np.ones(sub.n, bool)
        keep[sep] = False
        rest_local = np.flatnonzero(keep)
        rest = sub.subgraph(rest_local)
        comp, ncomp = kernels.component_labels(rest.n, rest.row_offsets, rest.col_indices)
        limit = -(-2 * sub.n // 3)
        if rest.n and np.bincount(comp).max() > limit:
            raise ValueError(f"invalid separator: a component exceeds ceil(2*{sub.n}/3) = {limit}")
        if rest.n:
            stack.extend(reversed(_pieces(rest, ids[rest_local], comp, ncomp)))
        stack.append(ids[sep])
    order = np.concatenate(placed) if placed else np.empty(0, np.int64)
    return LinearArrangement.from_order(order)


def random_spanning_forest(a: SparseSymMatrix, seed) -> Forest:
    """Minimum spanning forest under i.i.d. uniform edge weights.

    Weights are drawn in canonical edge order (``u < v``, row-major), so the
    forest depends only on the graph and the seed.
    """
    u, v = a.upper_edges()
    proper = u != v
    u, v = u[proper], v[proper]
    rng = np.random.default_rng(seed)
    w = 1.0 - rng.random(u.shape[0])
    keep = kernels.kruskal_forest(a.n, u, v, w)
    return Forest.from_edges(a.n, u[keep], v[keep])


def random_forest_arrangement(a: SparseSymMatrix, seed) -> LinearArrangement:
    return smallest_first_order(random_spanning_forest(a, seed))


def separator_forest_arrangement(forest: Forest, oracle: SeparatorOracle = centroid_separator) -> LinearArrangement:
    """Trees of ``forest`` in decreasing size, each laid out by :func:`separator_la`."""
    tree_matrix = forest.to_matrix()
    members = np.argsort(forest.component_id, kind="stable")
    bounds = np.r_[0, np.cumsum(forest.component_sizes)]
    parts = []
    for c in range(forest.component_sizes.shape[0]):
        ids = members[bounds[c] : bounds[c + 1]]
        if ids.shape[0] <= 2:
            parts.append(ids)
        else:
            parts.append(ids[separator_la(tree_matrix.subgraph(ids), oracle).order])
    order = np.concatenate(parts) if parts else np.empty(0, np.int64)
    return LinearArrangement.from_order(order)


@functools.lru_cache(maxsize=4)
def _all_arrangements(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int8).reshape(-1, n)


def brute_force_mla(a: SparseSymMatrix) -> tuple[LinearArrangement, int]:
    """Exact minimum linear arrangement by enumeration (``n <= 10``).

    Ties go to the lexicographically smallest ``forward`` array.
    """
    if a.n > MAX_BRUTE_FORCE_N:
        raise ValueError(f"brute force refuses n={a.n} > {MAX_BRUTE_FORCE_N}")
    if a.n == 0:
        return LinearArrangement.identity(0), 0
    table = _all_arrangements(a.n)
    u, v = a.upper_edges()
    cost = np.zeros(table.shape[0], np.int64)
    for x, y in zip(u.tolist(), v.tolist()):
        cost += np.abs(table[:, x].astype(np.int64) - table[:, y])
    best = int(np.argmin(cost))
    return LinearArrangement.from_forward(table[best]), int(cost[best])
