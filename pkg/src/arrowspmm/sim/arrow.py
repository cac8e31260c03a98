"""Simulated arrow multiply (single part) and decomposition multiply (all parts)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..decomposition import ArrowDecomposition, ArrowMatrix
from ..sparse import apply_row_permutation
from .ledger import CommLedger, CostModel


@dataclass(frozen=True, eq=False)
class Tile:
    """A CSR block with its own local coordinates."""

    nrows: int
    ncols: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.indices.shape[0])

    def matmul(self, d: np.ndarray) -> np.ndarray:
        return kernels.csr_spmm(self.indptr, self.indices, self.data, d)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols))
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out


def _tile(nrows, ncols, rows, cols, vals) -> Tile:
    indptr = np.zeros(nrows + 1, np.int64)
    np.cumsum(np.bincount(rows, minlength=nrows), out=indptr[1:])
    return Tile(nrows, ncols, indptr, cols.astype(np.int64), vals)


@dataclass(eq=False)
class RankState:
    """Tiles and dense slices held by one rank of one arrow part."""

    rank: int
    row_tile: Tile
    col_tile: Tile | None
    diag_tile: Tile | None
    d: np.ndarray
    c: np.ndarray | None = None


def _bounds(r: int, b: int, n: int) -> tuple[int, int]:
    return r * b, min((r + 1) * b, n)


def distribute_arrow(part: ArrowMatrix, x: np.ndarray) -> list[RankState]:
    """Hand tile row ``r`` of ``part`` to rank ``r``.

    ``x`` is already in the part's (permuted) row order. Rank ``r`` receives
    ``B(0,r)``, ``B(r,0)``, ``B(r,r)`` and rows ``rb .. rb+b-1`` of ``x``;
    rank 0 only keeps ``B(0,0)``. Only the active prefix spawns ranks.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != part.n:
        raise ValueError(f"X must have shape ({part.n}, k), got {x.shape}")
    n, b = part.n, part.b
    p = part.num_ranks
    m = part.matrix
    rows, cols, vals = m.row_indices(), m.col_indices, m.values
    ti, tj = rows // b, cols // b
    if n and (ti.max(initial=0) >= p or tj.max(initial=0) >= p):
        raise ValueError("part has entries outside its active rows")
    # kind 0: row tile (owner tj), 1: column tile (owner ti), 2: diagonal tile
    kind = np.where(ti == 0, 0, np.where(tj == 0, 1, 2))
    owner = np.where(kind == 0, tj, ti)
    if np.any((kind == 2) & (ti != tj)):
        raise ValueError("part has entries outside its arrow tiles")
    order = np.lexsort((cols, rows, owner, kind))
    kind, owner, rows, cols, vals = kind[order], owner[order], rows[order], cols[order], vals[order]
    key = kind * p + owner
    starts = np.searchsorted(key, np.arange(3 * p))
    ends = np.searchsorted(key, np.arange(3 * p), side="right")
    b0 = min(b, n)

    states = []
    for r in range(p):
        lo, hi = _bounds(r, b, n)
        h = hi - lo
        s = slice(starts[r], ends[r])
        row_tile = _tile(b0, h, rows[s], cols[s] - lo, vals[s])
        col_tile = diag_tile = None
        if r > 0:
            s = slice(starts[p + r], ends[p + r])
            col_tile = _tile(h, b0, rows[s] - lo, cols[s], vals[s])
            s = slice(starts[2 * p + r], ends[2 * p + r])
            diag_tile = _tile(h, h, rows[s] - lo, cols[s] - lo, vals[s])
        states.append(RankState(r, row_tile, col_tile, diag_tile, x[lo:hi].copy()))
    return states


def _binomial_pairs(p: int):
    """Rounds of (sender, receiver) pairs of a broadcast tree rooted at 0."""
    rounds = []
    step = 1
    while step < p:
        rounds.append([(r, r + step) for r in range(step) if r + step < p])
        step *= 2
    return rounds


def arrow_multiply_sim(
    states: list[RankState],
    model: CostModel | None = None,
    ledger: CommLedger | None = None,
    rank_offset: int = 0,
    phase: str = "arrow",
) -> tuple[np.ndarray, CommLedger]:
    """Run one arrow multiply over ``states``.

    1. Broadcast ``D(0)`` from rank 0 down a binomial tree.
    2. Every rank forms ``B(0,r) D(r)``; the partial sums are reduced to
       rank 0 along the mirrored tree, giving ``C(0)``.
    3. Rank ``r > 0`` forms ``C(r) = B(r,0) D(0) + B(r,r) D(r)``.

    Returns the stacked ``C`` slices and the ledger. Ranks in the ledger are
    ``rank_offset + r``.
    """
    p = len(states)
    if ledger is None:
        ledger = CommLedger(p, model or CostModel())
    if p == 0:
        return np.empty((0, 0)), ledger
    d0 = states[0].d
    w0 = d0.size
    rounds = _binomial_pairs(p)
    for pairs in rounds:
        for src, dst in pairs:
            ledger.send(rank_offset + src, rank_offset + dst, w0, f"{phase}:bcast")

    partial = [s.row_tile.matmul(s.d) for s in states]
    for pairs in reversed(rounds):
        for dst, src in pairs:
            ledger.send(rank_offset + src, rank_offset + dst, partial[src].size, f"{phase}:reduce")
            partial[dst] = partial[dst] + partial[src]

    states[0].c = partial[0]
    for s in states[1:]:
        s.c = s.col_tile.matmul(d0) + s.diag_tile.matmul(s.d)
    return np.concatenate([s.c for s in states]), ledger


def _touched(part: ArrowMatrix, pi) -> np.ndarray:
    """Mask over original vertices with a nonzero row in ``part``."""
    mask = np.zeros(part.n, bool)
    mask[pi.inverse[np.flatnonzero(part.matrix.degrees())]] = True
    return mask


def _route(ledger, vertices, src_pos, dst_pos, src_off, dst_off, b, k, phase):
    """Grouped point-to-point transfer of rows in two phases (even, then odd source)."""
    if vertices.shape[0] == 0:
        return
    src_local = src_pos[vertices] // b
    src = src_off + src_local
    dst = dst_off + dst_pos[vertices] // b
    # unique rows come back sorted by (parity, src, dst): the send schedule
    pairs, counts = np.unique(np.stack([src_local % 2, src, dst], axis=1), axis=0, return_counts=True)
    for (_, s, d), c in zip(pairs.tolist(), counts.tolist()):
        ledger.send(s, d, c * k, phase)


def sorting_network_rounds(p: int) -> int:
    """Rounds of a bitonic sorting network on ``p`` ranks (one-time routing setup)."""
    lg = math.ceil(math.log2(p)) if p > 1 else 0
    return lg * (lg + 1) // 2


def decomposition_multiply_sim(
    d: ArrowDecomposition,
    x: np.ndarray,
    model: CostModel | None = None,
    *,
    unpermute: bool = True,
    record_events: bool = False,
) -> tuple[np.ndarray, CommLedger]:
    """Multiply by every part, chaining inputs forward and partial results back.

    Part ``j`` runs on its own block of ranks. Before part ``j+1`` runs, each
    row it needs is sent from the rank holding it in part ``j``. Afterwards the
    partial outputs travel back from the last part to part 0, summed on
    arrival. The result is in part-0 order, or in vertex order when
    ``unpermute`` is set.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != d.n:
        raise ValueError(f"X must have shape ({d.n}, k), got {x.shape}")
    model = model or CostModel()
    b, k = d.b, x.shape[1]
    sizes = [part.num_ranks for part in d.parts]
    offsets = np.r_[0, np.cumsum(sizes)].astype(int)
    ledger = CommLedger(int(offsets[-1]), model, record_events)
    ledger.meta["part_ranks"] = sizes
    ledger.meta["sorting_rounds"] = sorting_network_rounds(int(offsets[-1]))
    if d.order == 0:
        return np.zeros_like(x), ledger

    # needed[j]: vertices with entries in parts j and later
    touched = [_touched(part, pi) for pi, part in d]
    needed = list(touched)
    for j in range(d.order - 2, -1, -1):
        needed[j] = needed[j] | needed[j + 1]
    needed_ids = [np.flatnonzero(m) for m in needed]
    pis = d.arrangements
    for j in range(1, d.order):
        src_pos = pis[j - 1].forward[needed_ids[j]]
        if src_pos.shape[0] and src_pos.max() >= d.parts[j - 1].active_rows:
            raise ValueError(f"part {j} needs rows outside the active prefix of part {j - 1}")

    xs = [apply_row_permutation(x, pis[0])]
    for j in range(1, d.order):
        xj = np.zeros_like(x)
        v = needed_ids[j]
        xj[pis[j].forward[v]] = xs[j - 1][pis[j - 1].forward[v]]
        _route(ledger, v, pis[j - 1].forward, pis[j].forward, offsets[j - 1], offsets[j], b, k, f"forward{j}")
        xs.append(xj)

    ys = []
    for j, part in enumerate(d.parts):
        states = distribute_arrow(part, xs[j])
        c, _ = arrow_multiply_sim(states, model, ledger, int(offsets[j]), f"part{j}")
        y = np.zeros_like(x)
        y[: c.shape[0]] = c
        ys.append(y)

    for j in range(d.order - 1, 0, -1):
        v = needed_ids[j]
        _route(ledger, v, pis[j].forward, pis[j - 1].forward, offsets[j], offsets[j - 1], b, k, f"reverse{j}")
        ys[j - 1][pis[j - 1].forward[v]] += ys[j][pis[j].forward[v]]

    yp = ys[0]
    if unpermute:
        return yp[pis[0].forward], ledger
    return yp, ledger
