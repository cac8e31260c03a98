"""Sparse symmetric matrices, linear arrangements and the reference SpMM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels

_INDEX = np.int64


def _as_index(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=_INDEX)


@dataclass(frozen=True, eq=False)
class CooEntries:
    """Coordinate triples; the construction and interchange form."""

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "rows", _as_index(self.rows))
        object.__setattr__(self, "cols", _as_index(self.cols))
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=np.float64))
        if not (self.rows.shape == self.cols.shape == self.values.shape):
            raise ValueError("rows, cols and values must have equal length")

    def __len__(self) -> int:
        return self.rows.shape[0]

    @classmethod
    def from_triples(cls, triples, n: int) -> "CooEntries":
        triples = list(triples)
        if not triples:
            return cls(np.empty(0), np.empty(0), np.empty(0), n)
        r, c, v = zip(*triples)
        return cls(np.array(r), np.array(c), np.array(v, dtype=float), n)


@dataclass(frozen=True, eq=False)
class SparseSymMatrix:
    """Square sparse matrix in compressed-row form.

    Column indices are strictly increasing within every row and no explicit
    zeros are stored. Symmetry is the normal case but is only enforced by
    :func:`symmetrize`; :meth:`is_symmetric` checks it.
    """

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", _as_index(self.row_offsets))
        object.__setattr__(self, "col_indices", _as_index(self.col_indices))
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=np.float64))
        if self.row_offsets.shape != (self.n + 1,):
            raise ValueError("row_offsets must have length n + 1")
        if self.row_offsets[-1] != self.col_indices.shape[0]:
            raise ValueError("row_offsets[n] must equal nnz")

    @classmethod
    def empty(cls, n: int) -> "SparseSymMatrix":
        return cls(n, np.zeros(n + 1), np.empty(0), np.empty(0))

    @classmethod
    def from_edges(cls, n: int, u, v, values=None) -> "SparseSymMatrix":
        """Symmetric matrix with one entry pair per undirected edge (weight 1 by default)."""
        u, v = _as_index(u), _as_index(v)
        w = np.ones(u.shape[0]) if values is None else np.asarray(values, dtype=float)
        loops = u == v
        rows = np.concatenate([u, v[~loops]])
        cols = np.concatenate([v, u[~loops]])
        vals = np.concatenate([w, w[~loops]])
        return csr_from_coo(CooEntries(rows, cols, vals, n))

    @property
    def nnz(self) -> int:
        return int(self.col_indices.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def row_indices(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=_INDEX), np.diff(self.row_offsets))

    def degrees(self) -> np.ndarray:
        """Stored entries per row; a self-loop counts once."""
        return np.diff(self.row_offsets)

    def to_coo(self) -> CooEntries:
        return CooEntries(self.row_indices(), self.col_indices.copy(), self.values.copy(), self.n)

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, self.col_indices, self.row_offsets), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.row_indices(), self.col_indices] = self.values
        return out

    def upper_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoints ``(u, v)`` with ``u <= v`` of every undirected edge, in row order."""
        rows = self.row_indices()
        keep = rows <= self.col_indices
        return rows[keep], self.col_indices[keep]

    @property
    def num_edges(self) -> int:
        rows = self.row_indices()
        return int(np.count_nonzero(rows <= self.col_indices))

    def is_symmetric(self) -> bool:
        t = transpose(self)
        return same_entries(self, t)

    def induced(self, keep_mask: np.ndarray) -> "SparseSymMatrix":
        """Entries whose row and column both satisfy ``keep_mask``; dimension unchanged."""
        rows = self.row_indices()
        sel = keep_mask[rows] & keep_mask[self.col_indices]
        return _from_sorted(self.n, rows[sel], self.col_indices[sel], self.values[sel])

    def subgraph(self, vertices: np.ndarray) -> "SparseSymMatrix":
        """Induced submatrix on ``vertices``, relabelled to ``0..len(vertices)-1``."""
        vertices = _as_index(vertices)
        local = np.full(self.n, -1, _INDEX)
        local[vertices] = np.arange(vertices.shape[0])
        rows = self.row_indices()
        sel = (local[rows] >= 0) & (local[self.col_indices] >= 0)
        coo = CooEntries(local[rows[sel]], local[self.col_indices[sel]], self.values[sel], vertices.shape[0])
        return csr_from_coo(coo)


def _from_sorted(n, rows, cols, vals) -> SparseSymMatrix:
    offsets = np.zeros(n + 1, _INDEX)
    np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])
    return SparseSymMatrix(n, offsets, cols, vals)


def same_entries(a: SparseSymMatrix, b: SparseSymMatrix) -> bool:
    """Exact structural and numerical equality."""
    return (
        a.n == b.n
        and np.array_equal(a.row_offsets, b.row_offsets)
        and np.array_equal(a.col_indices, b.col_indices)
        and np.array_equal(a.values, b.values)
    )


def transpose(a: SparseSymMatrix) -> SparseSymMatrix:
    coo = a.to_coo()
    return csr_from_coo(CooEntries(coo.cols, coo.rows, coo.values, a.n))


def csr_from_coo(entries: CooEntries) -> SparseSymMatrix:
    """Build CSR, summing duplicates and dropping entries that sum to exactly zero."""
    n = int(entries.n)
    r, c, v = entries.rows, entries.cols, entries.values
    if r.shape[0] and (r.min() < 0 or c.min() < 0 or r.max() >= n or c.max() >= n):
        raise ValueError(f"coordinate out of range for dimension {n}")
    if r.shape[0] == 0:
        return SparseSymMatrix.empty(n)
    order = np.lexsort((c, r))
    r, c, v = r[order], c[order], v[order]
    starts = np.flatnonzero(np.r_[True, (r[1:] != r[:-1]) | (c[1:] != c[:-1])])
    r, c, v = r[starts], c[starts], np.add.reduceat(v, starts)
    nonzero = v != 0.0
    return _from_sorted(n, r[nonzero], c[nonzero], v[nonzero])


def symmetrize(a: SparseSymMatrix) -> SparseSymMatrix:
    """Return ``A + A^T``.

    Off-diagonal values become ``A(i,j) + A(j,i)`` on both sides and diagonal
    values double, so an already symmetric input comes back scaled by two.
    Use :func:`pattern_only` afterwards for unweighted graphs.
    """
    coo = a.to_coo()
    return csr_from_coo(
        CooEntries(
            np.concatenate([coo.rows, coo.cols]),
            np.concatenate([coo.cols, coo.rows]),
            np.concatenate([coo.values, coo.values]),
            a.n,
        )
    )


def pattern_only(a: SparseSymMatrix) -> SparseSymMatrix:
    """Same sparsity pattern with every value set to 1.0."""
    return SparseSymMatrix(a.n, a.row_offsets, a.col_indices, np.ones(a.nnz))


@dataclass(frozen=True, eq=False)
class LinearArrangement:
    """A vertex permutation: ``forward[v]`` is the position of vertex ``v``."""

    forward: np.ndarray
    inverse: np.ndarray

    def __post_init__(self):
        fwd, inv = _as_index(self.forward), _as_index(self.inverse)
        n = fwd.shape[0]
        if inv.shape != (n,):
            raise ValueError("forward and inverse differ in length")
        if n and not np.array_equal(np.sort(fwd), np.arange(n)):
            raise ValueError("forward is not a permutation of 0..n-1")
        if not np.array_equal(inv[fwd], np.arange(n)):
            raise ValueError("inverse does not invert forward")
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "inverse", inv)

    @classmethod
    def from_forward(cls, forward) -> "LinearArrangement":
        forward = _as_index(forward)
        inverse = np.empty_like(forward)
        if forward.shape[0] and not np.array_equal(np.sort(forward), np.arange(forward.shape[0])):
            raise ValueError("forward is not a permutation of 0..n-1")
        inverse[forward] = np.arange(forward.shape[0])
        return cls(forward, inverse)

    @classmethod
    def from_order(cls, order) -> "LinearArrangement":
        """Arrangement placing ``order[i]`` at position ``i``."""
        order = _as_index(order)
        return cls.from_forward(_invert(order))

    @classmethod
    def identity(cls, n: int) -> "LinearArrangement":
        ids = np.arange(n, dtype=_INDEX)
        return cls(ids, ids.copy())

    def __len__(self) -> int:
        return self.forward.shape[0]

    @property
    def order(self) -> np.ndarray:
        """Vertices listed by position (same as ``inverse``)."""
        return self.inverse

    def then(self, other: "LinearArrangement") -> "LinearArrangement":
        """Apply ``self`` first, then relabel positions with ``other``."""
        return LinearArrangement.from_forward(other.forward[self.forward])

    def __eq__(self, other) -> bool:
        return isinstance(other, LinearArrangement) and np.array_equal(self.forward, other.forward)

    __hash__ = None


def _invert(perm: np.ndarray) -> np.ndarray:
    if perm.shape[0] and not np.array_equal(np.sort(perm), np.arange(perm.shape[0])):
        raise ValueError("not a permutation of 0..n-1")
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.shape[0], dtype=perm.dtype)
    return inv


def permute_symmetric(a: SparseSymMatrix, pi: LinearArrangement) -> SparseSymMatrix:
    """``P^T A P``: entry ``(u, v)`` moves to ``(pi(u), pi(v))``."""
    if len(pi) != a.n:
        raise ValueError(f"arrangement has length {len(pi)}, matrix has n={a.n}")
    fwd = pi.forward
    return csr_from_coo(CooEntries(fwd[a.row_indices()], fwd[a.col_indices], a.values, a.n))


def apply_row_permutation(x: np.ndarray, pi: LinearArrangement) -> np.ndarray:
    """``P^T X``: row ``v`` of the input becomes row ``pi(v)``."""
    x = np.asarray(x)
    if x.shape[0] != len(pi):
        raise ValueError(f"arrangement has length {len(pi)}, X has {x.shape[0]} rows")
    out = np.empty_like(x)
    out[pi.forward] = x
    return out


def dense_spmm_reference(a: SparseSymMatrix, x: np.ndarray) -> np.ndarray:
    """Sequential ``A @ X``; each output row accumulates its stored entries in order."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != a.n:
        raise ValueError(f"X must have shape ({a.n}, k), got {x.shape}")
    return kernels.csr_spmm(a.row_offsets, a.col_indices, a.values, x)
