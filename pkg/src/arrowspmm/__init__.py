"""Arrow matrix decomposition and simulated distributed sparse-times-dense multiply."""

__version__ = "0.1.0"

from .arrangement import (
    Forest,
    arrangement_cost,
    band_edge_count,
    brute_force_mla,
    centroid_separator,
    random_forest_arrangement,
    random_spanning_forest,
    separator_la,
    smallest_first_order,
)
from .decomposition import (
    ArrowDecomposition,
    ArrowMatrix,
    compaction_factors,
    extract_arrow,
    la_decompose,
    load_decomposition,
    prune_top_degree,
    reconstruct,
    save_decomposition,
    verify_arrow_width,
)
from .sparse import (
    CooEntries,
    LinearArrangement,
    SparseSymMatrix,
    apply_row_permutation,
    csr_from_coo,
    dense_spmm_reference,
    permute_symmetric,
    symmetrize,
)
from .zipf import ZipfModel, high_degree_count_bound, zipf_survival_bound, zipf_survival_exact

__all__ = [name for name in dir() if not name.startswith("_")]
