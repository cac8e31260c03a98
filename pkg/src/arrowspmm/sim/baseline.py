"""1D / 1.5D A-stationary baseline on a (p/c) x c grid of simulated ranks."""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..sparse import SparseSymMatrix
from .ledger import CommLedger, CostModel


def grid_shape(p: int, c: int) -> int:
    """Validate ``(p, c)`` and return the number of grid rows ``q = p / c``."""
    if c < 1 or p < 1:
        raise ValueError("p and c must be positive")
    if c * c > p:
        raise ValueError(f"replication c={c} needs c^2 <= p={p}")
    if p % c:
        raise ValueError(f"p={p} is not divisible by c={c}")
    return p // c


def _column_of_tile(q: int, c: int) -> np.ndarray:
    """Grid column whose block contains X tile ``t`` (tiles split as evenly as floor allows)."""
    bounds = (np.arange(c + 1) * q) // c
    return np.searchsorted(bounds, np.arange(q), side="right") - 1


def _tree_rounds(members: list[int]):
    """Binomial-tree rounds rooted at ``members[0]``: lists of (sender, receiver)."""
    rounds, step = [], 1
    while step < len(members):
        rounds.append([(members[i], members[i + step]) for i in range(step) if i + step < len(members)])
        step *= 2
    return rounds


def baseline_15d_sim(
    a: SparseSymMatrix,
    x: np.ndarray,
    p: int,
    c: int,
    model: CostModel | None = None,
) -> tuple[np.ndarray, CommLedger]:
    """A-stationary multiply with the dense input replicated ``c`` times.

    Rows of A and X are cut into ``q = p/c`` tiles of height ``ceil(n/q)``.
    Rank ``(i, j)`` (global id ``i*c + j``) owns the block of A with row tile
    ``i`` and the columns of the X tiles in column block ``j``. X tile ``t``
    starts on rank ``(t, j(t))`` and is broadcast down grid column ``j(t)``;
    partial Y tiles are then reduced across grid row ``i`` onto ``(i, j(i))``.
    With ``c = 1`` this is the 1D algorithm.
    """
    q = grid_shape(p, c)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != a.n:
        raise ValueError(f"X must have shape ({a.n}, k), got {x.shape}")
    n, k = a.n, x.shape[1]
    ledger = CommLedger(p, model or CostModel())
    if n == 0:
        return np.zeros((0, k)), ledger
    h = -(-n // q)
    lo = np.minimum(np.arange(q + 1) * h, n)
    col_of = _column_of_tile(q, c)
    tile_bounds = (np.arange(c + 1) * q) // c

    # broadcast X tiles; tiles with the same index inside their block share a round
    per_block = [list(range(tile_bounds[j], tile_bounds[j + 1])) for j in range(c)]
    for slot in range(max(len(t) for t in per_block)):
        trees = []
        for j in range(c):
            if slot < len(per_block[j]):
                t = per_block[j][slot]
                members = [((t + s) % q) * c + j for s in range(q)]
                trees.append((_tree_rounds(members), (lo[t + 1] - lo[t]) * k))
        depth = max((len(r) for r, _ in trees), default=0)
        for level in range(depth):
            for rounds, words in trees:
                if level < len(rounds):
                    for src, dst in rounds[level]:
                        ledger.send(src, dst, words, "bcast")

    rows = a.row_indices()
    row_tile = rows // h
    col_block = col_of[a.col_indices // h]
    y = np.zeros((n, k))
    for i in range(q):
        partial = {}
        for j in range(c):
            sel = (row_tile == i) & (col_block == j)
            height = lo[i + 1] - lo[i]
            indptr = np.zeros(height + 1, np.int64)
            np.cumsum(np.bincount(rows[sel] - lo[i], minlength=height), out=indptr[1:])
            partial[i * c + j] = kernels.csr_spmm(indptr, a.col_indices[sel], a.values[sel], x)
        members = [i * c + (col_of[i] + s) % c for s in range(c)]
        for level in reversed(_tree_rounds(members)):
            for dst, src in level:
                ledger.send(src, dst, partial[src].size, "reduce")
                partial[dst] = partial[dst] + partial[src]
        y[lo[i] : lo[i + 1]] = partial[members[0]]
    return y, ledger
