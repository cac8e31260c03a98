"""Arrow matrices and the pruning + arrangement decomposition loop."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arrangement import (
    arrangement_cost,
    random_forest_arrangement,
    random_spanning_forest,
    separator_forest_arrangement,
)
from .sparse import (
    CooEntries,
    LinearArrangement,
    SparseSymMatrix,
    csr_from_coo,
    permute_symmetric,
)

STRATEGIES = ("random-forest", "separator-tree", "provided")
DECOMPOSITION_SCHEMA = "arrowspmm.decomposition/1"


def in_arrow_tiles(rows: np.ndarray, cols: np.ndarray, b: int) -> np.ndarray:
    """Mask of coordinates inside tile (0, j), (i, 0) or (i, i) for tile size ``b``."""
    ti, tj = rows // b, cols // b
    return (ti == 0) | (tj == 0) | (ti == tj)


@dataclass(frozen=True, eq=False)
class ArrowMatrix:
    """One permuted part ``B``: head tiles plus block-diagonal tiles of size ``b``.

    The part is kept as a single CSR matrix in permuted coordinates; tiles are
    cut out on demand. ``active_rows`` is the prefix of rows that may carry
    nonzeros, which fixes the number of ranks a multiply uses.
    """

    n: int
    b: int
    matrix: SparseSymMatrix
    active_rows: int

    @classmethod
    def from_matrix(cls, matrix: SparseSymMatrix, b: int) -> "ArrowMatrix":
        """Wrap a permuted matrix; the active prefix ends at its last nonzero row."""
        nz = np.flatnonzero(matrix.degrees())
        active = int(nz[-1]) + 1 if nz.shape[0] else 0
        return cls(matrix.n, b, matrix, max(active, min(b, matrix.n)))

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @property
    def nnz_rows(self) -> int:
        """Rows holding at least one stored entry."""
        return int(np.count_nonzero(self.matrix.degrees()))

    @property
    def num_tiles(self) -> int:
        return -(-self.n // self.b) if self.n else 0

    @property
    def num_ranks(self) -> int:
        """Ranks needed for a multiply: one per tile row of the active prefix."""
        return max(1, -(-self.active_rows // self.b))

    def tile(self, i: int, j: int):
        """Tile ``(i, j)`` as a scipy CSR block (the last tile row/column may be short)."""
        b = self.b
        return self.matrix.to_scipy()[i * b : min((i + 1) * b, self.n), j * b : min((j + 1) * b, self.n)]


@dataclass(frozen=True, eq=False)
class ArrowDecomposition:
    """Ordered parts ``(pi_i, B_i)`` with ``A = sum_i P_i B_i P_i^T``.

    ``lambdas[i]`` and ``residual_edges[i]`` describe the residual graph that
    was arranged in iteration ``i`` (cost under the arrangement, edge count).
    """

    n: int
    b: int
    arrangements: tuple
    parts: tuple
    strategy: str = "provided"
    seed: int | None = None
    lambdas: tuple = ()
    residual_edges: tuple = ()
    input_edges: int = 0

    @property
    def order(self) -> int:
        return len(self.parts)

    def part_nnz(self) -> list[int]:
        return [p.nnz for p in self.parts]

    def __iter__(self):
        return iter(zip(self.arrangements, self.parts))


def prune_top_degree(a: SparseSymMatrix, b: int) -> tuple[np.ndarray, SparseSymMatrix]:
    """The ``b`` highest-degree vertices (ties by id) and the graph with them removed.

    The residual keeps dimension ``n``; pruned and isolated vertices simply
    carry no entries.
    """
    if b < 1:
        raise ValueError("b must be positive")
    deg = a.degrees()
    ids = np.arange(a.n)
    pruned = np.lexsort((ids, -deg))[: min(b, a.n)]
    keep = np.ones(a.n, bool)
    keep[pruned] = False
    return pruned.astype(np.int64), a.induced(keep)


def extract_arrow(aperm: SparseSymMatrix, b: int, arrangement: LinearArrangement | None = None):
    """Split a permuted matrix into its arrow part and the remainder.

    Returns ``(ArrowMatrix, CooEntries)``. The remainder is expressed in the
    original vertex ids when ``arrangement`` is given, otherwise in the
    permuted ids.
    """
    rows = aperm.row_indices()
    cols = aperm.col_indices
    inside = in_arrow_tiles(rows, cols, b)
    part = _select(aperm, rows, inside)
    r, c, v = rows[~inside], cols[~inside], aperm.values[~inside]
    if arrangement is not None:
        r, c = arrangement.inverse[r], arrangement.inverse[c]
    return ArrowMatrix.from_matrix(part, b), CooEntries(r, c, v, aperm.n)


def _select(a: SparseSymMatrix, rows: np.ndarray, mask: np.ndarray) -> SparseSymMatrix:
    offsets = np.zeros(a.n + 1, np.int64)
    np.cumsum(np.bincount(rows[mask], minlength=a.n), out=offsets[1:])
    return SparseSymMatrix(a.n, offsets, a.col_indices[mask], a.values[mask])


def _residual_order(residual: SparseSymMatrix, rest: np.ndarray, strategy: str, rng_seed, provided) -> np.ndarray:
    """Strategy order of the non-pruned vertices ``rest`` (original ids)."""
    if strategy == "provided":
        return rest[np.argsort(provided.forward[rest], kind="stable")]
    sub = residual.subgraph(rest)
    if strategy == "random-forest":
        local = random_forest_arrangement(sub, rng_seed)
    else:
        local = separator_forest_arrangement(random_spanning_forest(sub, rng_seed))
    return rest[local.order]


def la_decompose(
    a: SparseSymMatrix,
    b: int,
    strategy: str = "random-forest",
    seed: int = 0,
    arrangements=None,
) -> ArrowDecomposition:
    """Greedy arrow decomposition: prune, arrange, extract, repeat until empty.

    ``strategy`` is ``"random-forest"``, ``"separator-tree"`` (random spanning
    forest laid out by centroid recursion) or ``"provided"``, in which case
    ``arrangements`` lists one arrangement per iteration and the last one is
    reused once the list runs out.

    Each iteration's arrangement places, in this order: the pruned vertices
    (decreasing degree, then id), the residual vertices that still have edges
    (strategy order), vertices whose edges all go to pruned vertices (by id)
    and vertices with no remaining entries (by id). Rows that can hold
    nonzeros are therefore a prefix of every part.
    """
    if b < 2:
        raise ValueError(f"arrow width b must be >= 2, got {b}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if strategy == "provided":
        if isinstance(arrangements, LinearArrangement):
            arrangements = [arrangements]
        if not arrangements:
            raise ValueError("strategy 'provided' needs at least one arrangement")
        for pi in arrangements:
            if len(pi) != a.n:
                raise ValueError(f"provided arrangement has length {len(pi)}, matrix has n={a.n}")

    n = a.n
    ids = np.arange(n, dtype=np.int64)
    pis, parts, lambdas, medges = [], [], [], []
    current = a
    i = 0
    while current.nnz:
        deg = current.degrees()
        pruned, residual = prune_top_degree(current, b)
        keep = np.ones(n, bool)
        keep[pruned] = False
        rest = ids[keep]
        provided = arrangements[min(i, len(arrangements) - 1)] if strategy == "provided" else None
        ordered = _residual_order(residual, rest, strategy, [seed, i], provided)
        res_deg = residual.degrees()
        live = res_deg[ordered] > 0
        tail = np.sort(ordered[~live])
        tail = tail[np.argsort(deg[tail] == 0, kind="stable")]
        order = np.concatenate([pruned, ordered[live], tail])
        pi = LinearArrangement.from_order(order)

        lambdas.append(arrangement_cost(residual, pi))
        medges.append(residual.num_edges)
        part, rem = extract_arrow(permute_symmetric(current, pi), b, pi)
        # ensure the active prefix covers every vertex that still had entries
        active = max(part.active_rows, int(np.count_nonzero(deg)), min(b, n))
        part = ArrowMatrix(n, b, part.matrix, active)
        pis.append(pi)
        parts.append(part)
        current = csr_from_coo(rem)
        i += 1

    return ArrowDecomposition(
        n=n,
        b=b,
        arrangements=tuple(pis),
        parts=tuple(parts),
        strategy=strategy,
        seed=seed,
        lambdas=tuple(lambdas),
        residual_edges=tuple(medges),
        input_edges=a.num_edges,
    )


@dataclass(frozen=True)
class WidthReport:
    ok: bool
    violations: list


def verify_arrow_width(part: ArrowMatrix | SparseSymMatrix, b: int | None = None, limit: int = 100) -> WidthReport:
    """Check that every entry has ``i < b``, ``j < b`` or ``|i - j| <= b``.

    At most ``limit`` violating coordinates are listed.
    """
    if isinstance(part, ArrowMatrix):
        b = part.b if b is None else b
        part = part.matrix
    if b is None:
        raise ValueError("b is required for a bare matrix")
    rows = part.row_indices()
    cols = part.col_indices
    bad = (rows >= b) & (cols >= b) & (np.abs(rows - cols) > b)
    where = np.flatnonzero(bad)[:limit]
    return WidthReport(not bad.any(), list(zip(rows[where].tolist(), cols[where].tolist())))


def verify_tiles(part: ArrowMatrix) -> bool:
    """Every stored entry sits in a head or block-diagonal tile."""
    m = part.matrix
    return bool(in_arrow_tiles(m.row_indices(), m.col_indices, part.b).all())


@dataclass(frozen=True)
class CompactionReport:
    factors: list
    predicted_x: float | None
    lambdas: list
    residual_edges: list


def compaction_factors(d: ArrowDecomposition) -> CompactionReport:
    """Ratios ``nnz(B_i) / nnz(B_{i+1})`` plus the arrangement-cost prediction.

    The prediction is ``b * m / max_i lambda_i`` with ``m`` the undirected edge
    count of the input; ``None`` when no costs were recorded or all are zero.
    """
    nnz = d.part_nnz()
    factors = [nnz[i] / nnz[i + 1] for i in range(len(nnz) - 1)]
    predicted = None
    if d.lambdas and max(d.lambdas) > 0:
        predicted = d.b * d.input_edges / max(d.lambdas)
    return CompactionReport(factors, predicted, list(d.lambdas), list(d.residual_edges))


def reconstruct(d: ArrowDecomposition) -> SparseSymMatrix:
    """Sum of the un-permuted parts."""
    if not d.parts:
        return SparseSymMatrix.empty(d.n)
    rows, cols, vals = [], [], []
    for pi, part in d:
        m = part.matrix
        rows.append(pi.inverse[m.row_indices()])
        cols.append(pi.inverse[m.col_indices])
        vals.append(m.values)
    return csr_from_coo(CooEntries(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), d.n))


def decomposition_meta(d: ArrowDecomposition) -> dict:
    report = compaction_factors(d)
    return {
        "schema": DECOMPOSITION_SCHEMA,
        "n": d.n,
        "b": d.b,
        "order": d.order,
        "strategy": d.strategy,
        "seed": d.seed,
        "input_edges": d.input_edges,
        "part_nnz": d.part_nnz(),
        "part_nnz_rows": [p.nnz_rows for p in d.parts],
        "part_active_rows": [p.active_rows for p in d.parts],
        "lambdas": [int(x) for x in d.lambdas],
        "residual_edges": [int(x) for x in d.residual_edges],
        "compaction_factors": report.factors,
        "predicted_x": report.predicted_x,
    }


def save_decomposition(d: ArrowDecomposition, directory, *, force: bool = False) -> Path:
    """Write ``meta.json``, ``part<i>.mtx`` and ``perm<i>.txt`` into ``directory``."""
    from .mmio import write_matrix_market, write_permutation

    directory = Path(directory)
    if directory.exists() and any(directory.iterdir()) and not force:
        raise FileExistsError(f"{directory} exists and is not empty")
    directory.mkdir(parents=True, exist_ok=True)
    for stale in list(directory.glob("part*.mtx")) + list(directory.glob("perm*.txt")):
        stale.unlink()
    for i, (pi, part) in enumerate(d):
        write_matrix_market(directory / f"part{i}.mtx", part.matrix)
        write_permutation(directory / f"perm{i}.txt", pi)
    with open(directory / "meta.json", "w") as fh:
        json.dump(decomposition_meta(d), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return directory


def load_decomposition(directory) -> ArrowDecomposition:
    from .mmio import FormatError, read_matrix_market, read_permutation

    directory = Path(directory)
    meta_path = directory / "meta.json"
    if not meta_path.is_file():
        raise FileNotFoundError(f"{meta_path} not found")
    with open(meta_path) as fh:
        meta = json.load(fh)
    if meta.get("schema") != DECOMPOSITION_SCHEMA:
        raise FormatError(f"{meta_path}: unexpected schema {meta.get('schema')!r}")
    n, b = int(meta["n"]), int(meta["b"])
    pis, parts = [], []
    for i in range(int(meta["order"])):
        m = read_matrix_market(directory / f"part{i}.mtx")
        pi = read_permutation(directory / f"perm{i}.txt")
        if m.n != n or len(pi) != n:
            raise FormatError(f"{directory}: part {i} does not have dimension {n}")
        pis.append(pi)
        parts.append(ArrowMatrix(n, b, m, int(meta["part_active_rows"][i])))
    return ArrowDecomposition(
        n=n,
        b=b,
        arrangements=tuple(pis),
        parts=tuple(parts),
        strategy=meta["strategy"],
        seed=meta["seed"],
        lambdas=tuple(meta["lambdas"]),
        residual_edges=tuple(meta["residual_edges"]),
        input_edges=int(meta["input_edges"]),
    )


def expected_order_bound(m: int) -> int:
    """``ceil(log2 m) + 1``, the order expected of a 2-compacting decomposition."""
    return math.ceil(math.log2(m)) + 1 if m > 1 else 1
