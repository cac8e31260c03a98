"""Deterministic simulation of distributed SpMM with an alpha-beta ledger."""

from .arrow import RankState, Tile, arrow_multiply_sim, decomposition_multiply_sim, distribute_arrow
from .baseline import baseline_15d_sim
from .ledger import CommLedger, CostModel, ledger_summary, ledger_to_dict, ledger_to_json
from .storage import storage_report

__all__ = [
    "CommLedger",
    "CostModel",
    "RankState",
    "Tile",
    "arrow_multiply_sim",
    "baseline_15d_sim",
    "decomposition_multiply_sim",
    "distribute_arrow",
    "ledger_summary",
    "ledger_to_dict",
    "ledger_to_json",
    "storage_report",
]
