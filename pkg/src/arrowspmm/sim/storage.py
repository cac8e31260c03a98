"""Word counts for storing a decomposition across its simulated ranks."""

from __future__ import annotations

import numpy as np

from ..decomposition import ArrowDecomposition
from .arrow import distribute_arrow


def storage_report(d: ArrowDecomposition, k: int, replication: int | None = None) -> dict:
    """Per-rank and total storage in 64-bit words.

    Each rank stores its tiles in CSR: one value and one column index per
    entry, a row-pointer array for the row tile and, on ranks ``r >= 1``, one
    for the column and diagonal panel. Dense words are the owned slice of the
    input. ``replication`` adds the 1.5D comparison figure ``c * n * k``.
    """
    per_rank = []
    zeros = np.zeros((d.n, 1))
    for j, part in enumerate(d.parts):
        for s in distribute_arrow(part, zeros):
            nnz = s.row_tile.nnz
            pointers = s.row_tile.nrows + 1
            if s.col_tile is not None:
                nnz += s.col_tile.nnz + s.diag_tile.nnz
                pointers += s.col_tile.nrows + 1
            per_rank.append(
                {
                    "part": j,
                    "rank": s.rank,
                    "value_words": nnz,
                    "index_words": nnz + pointers,
                    "dense_words": s.d.shape[0] * k,
                }
            )
    totals = {key: sum(r[key] for r in per_rank) for key in ("value_words", "index_words", "dense_words")}
    totals["total_words"] = sum(totals.values())
    nnz = sum(d.part_nnz())
    report = {
        "n": d.n,
        "k": k,
        "nnz": nnz,
        "per_rank": per_rank,
        "totals": totals,
        "bound_total": 2 * nnz + 2 * d.n * k + 4 * d.n,
        "bound_dense": 2 * d.n * k,
    }
    if replication is not None:
        report["replicated_dense_words"] = replication * d.n * k
    return report
