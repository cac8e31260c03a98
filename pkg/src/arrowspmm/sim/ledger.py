"""Alpha-beta communication ledger for simulated ranks.

Clock model: every rank carries the dependency chain ``(messages, words)``
that ends at it. A message waits for the more expensive of its two endpoint
chains and extends it by one message of ``w`` words; afterwards both
endpoints share the new chain. The critical path is the most expensive chain.
Chains are integer pairs, so totals are exact and reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

LEDGER_SCHEMA = "arrowspmm.ledger/1"


@dataclass(frozen=True)
class CostModel:
    """Latency per message and cost per 64-bit word."""

    latency_cost: float = 1.0
    bandwidth_cost: float = 1.0

    def __post_init__(self):
        if self.latency_cost < 0 or self.bandwidth_cost < 0:
            raise ValueError("alpha and beta must be nonnegative")

    def cost(self, messages: int, words: int) -> float:
        return self.latency_cost * messages + self.bandwidth_cost * words


@dataclass(frozen=True)
class Event:
    src: int
    dst: int
    words: int
    phase: str


@dataclass
class CommLedger:
    num_ranks: int
    model: CostModel = field(default_factory=CostModel)
    record_events: bool = False

    def __post_init__(self):
        p = self.num_ranks
        self.sent_words = np.zeros(p, np.int64)
        self.recv_words = np.zeros(p, np.int64)
        self.sent_messages = np.zeros(p, np.int64)
        self.recv_messages = np.zeros(p, np.int64)
        self.chain_messages = np.zeros(p, np.int64)
        self.chain_words = np.zeros(p, np.int64)
        self.events: list[Event] = []
        self.meta: dict = {}

    def _chain_key(self, r: int):
        m, w = int(self.chain_messages[r]), int(self.chain_words[r])
        return (self.model.cost(m, w), m, w)

    def send(self, src: int, dst: int, words: int, phase: str = "") -> None:
        if src == dst:
            raise ValueError("a rank cannot message itself")
        words = int(words)
        self.sent_words[src] += words
        self.recv_words[dst] += words
        self.sent_messages[src] += 1
        self.recv_messages[dst] += 1
        start = src if self._chain_key(src) >= self._chain_key(dst) else dst
        m = self.chain_messages[start] + 1
        w = self.chain_words[start] + words
        self.chain_messages[src] = self.chain_messages[dst] = m
        self.chain_words[src] = self.chain_words[dst] = w
        if self.record_events:
            self.events.append(Event(src, dst, words, phase))

    def critical_chain(self) -> tuple[int, int]:
        """``(messages, words)`` of the most expensive dependency chain."""
        if self.num_ranks == 0:
            return (0, 0)
        best = max(range(self.num_ranks), key=self._chain_key)
        return int(self.chain_messages[best]), int(self.chain_words[best])

    @property
    def critical_path(self) -> float:
        return self.model.cost(*self.critical_chain())

    def phase_words(self, phase: str) -> int:
        """Words sent in events tagged ``phase`` (needs ``record_events``)."""
        return sum(e.words for e in self.events if e.phase == phase)


def ledger_summary(ledger: CommLedger, model: CostModel | None = None) -> dict:
    """Per-rank maxima, totals and the critical path, as plain numbers."""
    model = model or ledger.model
    if ledger.num_ranks == 0:
        zeros = dict.fromkeys(
            ["max_sent_words", "max_recv_words", "total_words", "total_messages", "chain_messages", "chain_words"], 0
        )
        return {**zeros, "critical_path": 0.0, "num_ranks": 0}
    chain_m, chain_w = ledger.critical_chain()
    return {
        "num_ranks": ledger.num_ranks,
        "max_sent_words": int(ledger.sent_words.max()),
        "max_recv_words": int(ledger.recv_words.max()),
        "total_words": int(ledger.sent_words.sum()),
        "total_messages": int(ledger.sent_messages.sum()),
        "chain_messages": chain_m,
        "chain_words": chain_w,
        "critical_path": model.cost(chain_m, chain_w),
    }


def ledger_to_dict(ledger: CommLedger) -> dict:
    per_rank = [
        {
            "rank": r,
            "sent_words": int(ledger.sent_words[r]),
            "recv_words": int(ledger.recv_words[r]),
            "sent_messages": int(ledger.sent_messages[r]),
            "recv_messages": int(ledger.recv_messages[r]),
        }
        for r in range(ledger.num_ranks)
    ]
    summary = ledger_summary(ledger)
    return {
        "schema": LEDGER_SCHEMA,
        "model": {"alpha": ledger.model.latency_cost, "beta": ledger.model.bandwidth_cost},
        "per_rank": per_rank,
        "totals": {k: v for k, v in summary.items() if k != "critical_path"},
        "critical_path": summary["critical_path"],
    }


def ledger_to_json(ledger: CommLedger) -> str:
    return json.dumps(ledger_to_dict(ledger), sort_keys=True, indent=2)
