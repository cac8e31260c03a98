import os
import subprocess
import sys

import networkx as nx
import numpy as np
import pytest

from arrowspmm import kernels
from arrowspmm.arrangement import Forest
from arrowspmm.generators import random_symmetric, random_tree
from arrowspmm.sparse import SparseSymMatrix

from oracles import to_networkx


def both(fn, *args):
    """Call a dispatcher under each backend and return both results."""
    saved = kernels.USE_JIT
    try:
        kernels.USE_JIT = True
        a = fn(*args)
        kernels.USE_JIT = False
        b = fn(*args)
    finally:
        kernels.USE_JIT = saved
    return a, b


pytestmark = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


def random_forest_matrix(n, seed):
    rng = np.random.default_rng(seed)
    t = random_tree(n, seed)
    u, v = t.upper_edges()
    keep = rng.random(u.shape[0]) < 0.8
    return SparseSymMatrix.from_edges(n, u[keep], v[keep])


@pytest.mark.parametrize("seed", range(10))
def test_spmm_backends_agree(seed):
    a = random_symmetric(200, 6, seed)
    x = np.random.default_rng(seed).random((200, 5))
    y1, y2 = both(kernels.csr_spmm, a.row_offsets, a.col_indices, a.values, x)
    np.testing.assert_allclose(y1, y2, rtol=1e-14, atol=0)
    np.testing.assert_allclose(y1, a.to_dense() @ x, rtol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_kruskal_backends_agree(seed):
    a = random_symmetric(150, 5, seed)
    u, v = a.upper_edges()
    w = 1.0 - np.random.default_rng(seed).random(u.shape[0])
    k1, k2 = both(kernels.kruskal_forest, a.n, u, v, w)
    np.testing.assert_array_equal(k1, k2)
    g = to_networkx(a)
    for x, y, wt in zip(u.tolist(), v.tolist(), w.tolist()):
        g[x][y]["weight"] = wt
    expected = sum(d["weight"] for *_, d in nx.minimum_spanning_edges(g, data=True))
    assert w[k1].sum() == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_forest_kernels_agree(seed):
    n = 5 + 7 * seed
    a = random_forest_matrix(n, seed)
    args = (n, a.row_offsets, a.col_indices)
    for r1, r2 in zip(*both(kernels.bfs_forest, *args)):
        np.testing.assert_array_equal(r1, r2)
    f = Forest.from_tree_matrix(a)
    s1, s2 = both(kernels.subtree_sizes, f.parent, f.depth, f.order)
    np.testing.assert_array_equal(s1, s2)
    o1, o2 = both(kernels.smallest_first, f.parent, f.depth, f.order, f.roots)
    np.testing.assert_array_equal(o1, o2)
    (c1, n1), (c2, n2) = both(kernels.component_labels, *args)
    np.testing.assert_array_equal(c1, c2)
    assert n1 == n2


@pytest.mark.parametrize("seed", range(20))
def test_centroid_backends_agree(seed):
    t = random_tree(3 + 11 * seed, seed)
    args = (t.n, t.row_offsets, t.col_indices)
    c1, c2 = both(kernels.tree_centroid, *args)
    assert c1 == c2 >= 0


def test_centroid_rejects_non_trees():
    cyc = SparseSymMatrix.from_edges(3, [0, 1, 2], [1, 2, 0])
    two = SparseSymMatrix.from_edges(4, [0, 2], [1, 3])
    loop = SparseSymMatrix.from_edges(2, [0, 0], [0, 1])
    for g in (cyc, two, loop):
        assert both(kernels.tree_centroid, g.n, g.row_offsets, g.col_indices) == (-1, -1)


@pytest.mark.parametrize("value, expected", [("0", "numpy"), ("off", "numpy"), ("1", "numba")])
def test_env_flag_selects_backend(value, expected):
    env = {**os.environ, "ARROWSPMM_JIT": value}
    out = subprocess.run(
        [sys.executable, "-c", "from arrowspmm import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected
