"""Matrix Market and permutation file I/O."""

from __future__ import annotations

import os

import numpy as np
import scipy.io as sio
import scipy.sparse as sp

from .sparse import CooEntries, LinearArrangement, SparseSymMatrix, csr_from_coo, pattern_only, symmetrize


class FormatError(ValueError):
    """A file exists but does not hold what it claims to."""


def read_matrix_market(path, *, pattern: bool = False) -> SparseSymMatrix:
    """Load a square coordinate matrix.

    ``symmetric`` files are expanded to both triangles; ``general`` files are
    passed through :func:`~arrowspmm.sparse.symmetrize`. ``pattern`` files get
    unit values, and ``pattern=True`` forces unit values for any file.
    """
    try:
        rows, cols, _, fmt, field, symmetry = sio.mminfo(path)
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: not a Matrix Market file ({exc})") from exc
    if fmt != "coordinate":
        raise FormatError(f"{path}: only coordinate format is supported")
    if rows != cols:
        raise FormatError(f"{path}: matrix is {rows}x{cols}, expected square")
    if field not in ("real", "integer", "pattern"):
        raise FormatError(f"{path}: unsupported field '{field}'")
    if symmetry not in ("general", "symmetric"):
        raise FormatError(f"{path}: unsupported symmetry '{symmetry}'")
    m = sp.coo_matrix(sio.mmread(path))
    vals = np.ones(m.nnz) if field == "pattern" else m.data.astype(np.float64)
    a = csr_from_coo(CooEntries(m.row, m.col, vals, rows))
    if symmetry == "general":
        a = symmetrize(a)
    if pattern:
        a = pattern_only(a)
    return a


def write_matrix_market(path, a: SparseSymMatrix, comment: str = "") -> None:
    """Write ``symmetric real`` with the lower triangle and diagonal, full precision."""
    if not a.is_symmetric():
        raise ValueError("only symmetric matrices can be written")
    rows = a.row_indices()
    lower = rows >= a.col_indices
    m = sp.coo_matrix((a.values[lower], (rows[lower], a.col_indices[lower])), shape=a.shape)
    sio.mmwrite(os.fspath(path), m, comment=comment, field="real", precision=17, symmetry="symmetric")


def write_permutation(path, pi: LinearArrangement) -> None:
    with open(path, "w") as fh:
        fh.write(f"n={len(pi)}\n")
        if len(pi):
            fh.write("\n".join(map(str, pi.forward.tolist())))
            fh.write("\n")


def read_permutation(path) -> LinearArrangement:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise FormatError(f"{path}: missing 'n=<count>' header")
        n = int(header[2:])
        body = fh.read().split()
    if len(body) != n:
        raise FormatError(f"{path}: header says n={n}, found {len(body)} entries")
    try:
        return LinearArrangement.from_forward(np.array(body, dtype=np.int64))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
