"""Hot inner loops, in two interchangeable forms.

Every kernel exists as a plain loop (compiled with ``numba.njit`` when numba
is importable) and as a vectorised numpy/scipy routine. The public names at
the bottom of this module dispatch to one of the two, chosen once at import
time from the ``ARROWSPMM_JIT`` environment variable::

    ARROWSPMM_JIT=0 python -m pytest      # force the numpy path

Both forms return identical results; ``tests/test_kernels.py`` checks this and
``benchmarks/bench_kernels.py`` times them against each other.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _jit_requested() -> bool:
    flag = os.environ.get("ARROWSPMM_JIT", "1").strip().lower()
    return flag not in ("0", "false", "no", "off", "")


HAVE_NUMBA = numba is not None
USE_JIT = HAVE_NUMBA and _jit_requested()
BACKEND = "numba" if USE_JIT else "numpy"


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# loop kernels
# ---------------------------------------------------------------------------


@_njit
def _csr_spmm_loop(indptr, indices, data, x):
    nrows = indptr.shape[0] - 1
    k = x.shape[1]
    y = np.zeros((nrows, k))
    for i in range(nrows):
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            a = data[e]
            for c in range(k):
                y[i, c] += a * x[j, c]
    return y


@_njit
def _kruskal_loop(n, u, v, w):
    order = np.argsort(w, kind="mergesort")
    root = np.arange(n)
    size = np.ones(n, np.int64)
    keep = np.zeros(u.shape[0], np.bool_)
    for e in order:
        a = u[e]
        while root[a] != a:
            root[a] = root[root[a]]
            a = root[a]
        b = v[e]
        while root[b] != b:
            root[b] = root[root[b]]
            b = root[b]
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        root[b] = a
        size[a] += size[b]
        keep[e] = True
    return keep


@_njit
def _bfs_forest_loop(n, indptr, indices):
    parent = np.full(n, -1, np.int64)
    depth = np.zeros(n, np.int64)
    order = np.empty(n, np.int64)
    comp = np.empty(n, np.int64)
    head = 0
    tail = 0
    ncomp = 0
    for s in range(n):
        if parent[s] != -1:
            continue
        parent[s] = s
        comp[s] = ncomp
        order[tail] = s
        tail += 1
        while head < tail:
            x = order[head]
            head += 1
            for e in range(indptr[x], indptr[x + 1]):
                y = indices[e]
                if parent[y] == -1:
                    parent[y] = x
                    depth[y] = depth[x] + 1
                    comp[y] = ncomp
                    order[tail] = y
                    tail += 1
        ncomp += 1
    return parent, depth, order, comp


@_njit
def _subtree_sizes_loop(parent, order):
    n = parent.shape[0]
    size = np.ones(n, np.int64)
    for i in range(n - 1, -1, -1):
        x = order[i]
        p = parent[x]
        if p != x:
            size[p] += size[x]
    return size


@_njit
def _smallest_first_loop(parent, order, roots):
    n = parent.shape[0]
    size = _subtree_sizes_loop(parent, order)
    # children grouped by parent, then increasing subtree size, then id
    by_size = np.argsort(size, kind="mergesort")
    ranked = by_size[np.argsort(parent[by_size], kind="mergesort")]
    start = np.zeros(n + 1, np.int64)
    for x in range(n):
        if parent[x] != x:
            start[parent[x] + 1] += 1
    for x in range(n):
        start[x + 1] += start[x]
    children = np.empty(n, np.int64)
    fill = start[:n].copy()
    for x in ranked:
        p = parent[x]
        if p != x:
            children[fill[p]] = x
            fill[p] += 1

    out = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    pos = 0
    for r in roots:
        top = 0
        stack[top] = r
        top += 1
        while top > 0:
            top -= 1
            x = stack[top]
            out[pos] = x
            pos += 1
            for e in range(start[x + 1] - 1, start[x] - 1, -1):
                stack[top] = children[e]
                top += 1
    return out


@_njit
def _tree_centroid_loop(n, indptr, indices):
    if n == 0:
        return -1
    inner = 0
    for x in range(n):
        for e in range(indptr[x], indptr[x + 1]):
            if indices[e] == x:
                return -1
            inner += 1
    if inner != 2 * (n - 1):
        return -1
    parent = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    parent[0] = 0
    order[0] = 0
    head = 0
    tail = 1
    while head < tail:
        x = order[head]
        head += 1
        for e in range(indptr[x], indptr[x + 1]):
            y = indices[e]
            if parent[y] == -1:
                parent[y] = x
                order[tail] = y
                tail += 1
    if tail != n:
        return -1
    size = np.ones(n, np.int64)
    heaviest = np.zeros(n, np.int64)
    for i in range(n - 1, 0, -1):
        x = order[i]
        p = parent[x]
        size[p] += size[x]
        if size[x] > heaviest[p]:
            heaviest[p] = size[x]
    half = n // 2
    for x in range(n):
        worst = max(heaviest[x], n - size[x])
        if worst <= half:
            return x
    return -1


# ---------------------------------------------------------------------------
# numpy / scipy kernels
# ---------------------------------------------------------------------------


def _csr_spmm_numpy(indptr, indices, data, x):
    nrows = indptr.shape[0] - 1
    y = np.zeros((nrows, x.shape[1]))
    if data.shape[0]:
        rows = np.repeat(np.arange(nrows), np.diff(indptr))
        np.add.at(y, rows, data[:, None] * x[indices])
    return y


def _kruskal_numpy(n, u, v, w):
    keep = np.zeros(u.shape[0], bool)
    if u.shape[0] == 0:
        return keep
    # weights lie in (0, 1]; csgraph treats stored zeros as missing edges
    g = sp.csr_matrix((w, (u, v)), shape=(n, n))
    tree = csgraph.minimum_spanning_tree(g).tocoo()
    lo = np.minimum(tree.row, tree.col).astype(np.int64)
    hi = np.maximum(tree.row, tree.col).astype(np.int64)
    keys = u.astype(np.int64) * n + v
    order = np.argsort(keys, kind="stable")
    hit = np.searchsorted(keys[order], lo * n + hi)
    keep[order[hit]] = True
    return keep


def _component_labels_numpy(n, indptr, indices):
    g = sp.csr_matrix((np.ones(indices.shape[0]), indices, indptr), shape=(n, n))
    _, raw = csgraph.connected_components(g, directed=False)
    # relabel so component ids follow their smallest vertex
    _, first = np.unique(raw, return_index=True)
    relabel = np.argsort(np.argsort(first)).astype(np.int64)
    return relabel[raw], first.shape[0]


def _bfs_forest_numpy(n, indptr, indices):
    comp, ncomp = _component_labels_numpy(n, indptr, indices)
    roots = np.full(ncomp, n, np.int64)
    np.minimum.at(roots, comp, np.arange(n))
    parent = np.full(n, -1, np.int64)
    depth = np.zeros(n, np.int64)
    parent[roots] = roots
    levels = [roots]
    frontier = roots
    d = 0
    while frontier.shape[0]:
        d += 1
        counts = indptr[frontier + 1] - indptr[frontier]
        src = np.repeat(frontier, counts)
        starts = np.repeat(indptr[frontier] - np.cumsum(counts) + counts, counts)
        nbr = indices[starts + np.arange(src.shape[0])]
        fresh = parent[nbr] == -1
        nbr, src = nbr[fresh], src[fresh]
        nbr, first = np.unique(nbr, return_index=True)
        parent[nbr] = src[first]
        depth[nbr] = d
        levels.append(nbr)
        frontier = nbr
    order = np.concatenate(levels) if levels else np.empty(0, np.int64)
    return parent, depth, order, comp


def _levels(depth, order):
    by_depth = order[np.argsort(depth[order], kind="stable")]
    cuts = np.flatnonzero(np.diff(depth[by_depth])) + 1
    return np.split(by_depth, cuts)


def _subtree_sizes_numpy(parent, depth, order):
    n = parent.shape[0]
    size = np.ones(n, np.int64)
    for level in reversed(_levels(depth, order)[1:]):
        np.add.at(size, parent[level], size[level])
    return size


def _smallest_first_numpy(parent, depth, order, roots):
    n = parent.shape[0]
    if n == 0:
        return np.empty(0, np.int64)
    size = _subtree_sizes_numpy(parent, depth, order)
    ids = np.arange(n)
    child = ids[parent != ids]
    child = child[np.lexsort((child, size[child], parent[child]))]
    # offset of each child inside its parent's span
    csum = np.cumsum(size[child])
    group_start = np.r_[True, parent[child][1:] != parent[child][:-1]]
    base = np.maximum.accumulate(np.where(group_start, csum - size[child], 0))
    rel = np.zeros(n, np.int64)
    rel[child] = 1 + csum - size[child] - base

    pos = np.empty(n, np.int64)
    offsets = np.cumsum(size[roots]) - size[roots]
    pos[roots] = offsets
    for level in _levels(depth, order)[1:]:
        level = level[parent[level] != level]
        pos[level] = pos[parent[level]] + rel[level]
    out = np.empty(n, np.int64)
    out[pos] = ids
    return out


def _tree_centroid_numpy(n, indptr, indices):
    if n == 0 or indices.shape[0] != 2 * (n - 1):
        return -1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    if np.any(rows == indices):
        return -1
    parent, depth, order, comp = _bfs_forest_numpy(n, indptr, indices)
    if comp.max() != 0:
        return -1
    size = _subtree_sizes_numpy(parent, depth, order)
    nonroot = np.flatnonzero(parent != np.arange(n))
    heaviest = np.zeros(n, np.int64)
    np.maximum.at(heaviest, parent[nonroot], size[nonroot])
    worst = np.maximum(heaviest, n - size)
    hits = np.flatnonzero(worst <= n // 2)
    return int(hits[0]) if hits.shape[0] else -1


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def csr_spmm(indptr, indices, data, x):
    """Sparse (CSR) times dense, accumulating each row in stored order."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if USE_JIT:
        return _csr_spmm_loop(indptr, indices, data, x)
    return _csr_spmm_numpy(indptr, indices, data, x)


def kruskal_forest(n, u, v, w):
    """Mask of edges kept by a minimum spanning forest (weights in (0, 1])."""
    if USE_JIT:
        return _kruskal_loop(n, u, v, w)
    return _kruskal_numpy(n, u, v, w)


def bfs_forest(n, indptr, indices):
    """Root every component at its smallest vertex and walk it breadth-first.

    Returns ``(parent, depth, order, comp)``; ``parent[r] == r`` for roots,
    ``order`` lists vertices by (depth, id), ``comp`` numbers components by
    their smallest vertex. Parents are only backend-independent on forests.
    """
    if USE_JIT:
        parent, depth, order, comp = _bfs_forest_loop(n, indptr, indices)
        return parent, depth, order[np.lexsort((order, depth[order]))], comp
    return _bfs_forest_numpy(n, indptr, indices)


def component_labels(n, indptr, indices):
    """Connected-component label per vertex, numbered by smallest member."""
    if USE_JIT:
        comp = _bfs_forest_loop(n, indptr, indices)[3]
        return comp, (int(comp.max()) + 1 if n else 0)
    return _component_labels_numpy(n, indptr, indices)


def smallest_first(parent, depth, order, roots):
    """Pre-order of a rooted forest, children by increasing subtree size."""
    if USE_JIT:
        return _smallest_first_loop(parent, order, roots)
    return _smallest_first_numpy(parent, depth, order, roots)


def subtree_sizes(parent, depth, order):
    if USE_JIT:
        return _subtree_sizes_loop(parent, order)
    return _subtree_sizes_numpy(parent, depth, order)


def tree_centroid(n, indptr, indices):
    """Smallest-id centroid of a tree, or -1 if the graph is not a tree."""
    if USE_JIT:
        return int(_tree_centroid_loop(n, indptr, indices))
    return _tree_centroid_numpy(n, indptr, indices)
