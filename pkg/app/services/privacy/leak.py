"""
Which thresholds a transcript exposes, and the normalized bit count q_t(D).

A phase-ending Update tells an observer that the delivering site's current
block fired on exactly that item, i.e. it reveals one threshold. Exact round
broadcasts and bootstrap forwarding reveal none, since thresholds are redrawn
for the next round.
"""
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional, Sequence

from app.errors import AuditError
from app.services.tracking.transcript import ItemLog, Transcript


@dataclass
class LeakSet:
    by_round: dict[int, set[tuple[int, int]]] = field(default_factory=lambda: defaultdict(set))

    def add(self, round_index: int, site: int, block: int):
        self.by_round[round_index].add((site, block))

    @property
    def entries(self) -> set[tuple[int, int]]:
        """All exposed (site, block) pairs, rounds merged."""
        merged = set()
        for pairs in self.by_round.values():
            merged |= pairs
        return merged

    def round_entries(self, round_index: int) -> set[tuple[int, int]]:
        return set(self.by_round.get(round_index, ()))

    def round_size(self, round_index: int) -> int:
        return len(self.by_round.get(round_index, ()))

    def __len__(self) -> int:
        return sum(len(pairs) for pairs in self.by_round.values())

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return any(pair in pairs for pairs in self.by_round.values())


def compute_leak_set(transcript: Transcript, item_log: ItemLog) -> LeakSet:
    """
    Collects (site, block) for every phase-ending Update.

    The block is the one holding the triggering item, (c - 1) // Delta + 1 for
    the site's round count c after the item.

    Raises:
        AuditError: If the logs have different lengths or disagree on a step.
    """
    if len(transcript) != len(item_log):
        raise AuditError(f"Transcript has {len(transcript)} steps, item log {len(item_log)}")
    leaks = LeakSet()
    for t in transcript.phase_end_steps():
        site, round_index, count, block_size = item_log.entry(t)
        if site != transcript.action(t).site:
            raise AuditError(f"Step {t}: transcript site {transcript.action(t).site}, item log site {site}")
        if site == 0 or round_index < 0 or block_size < 1:
            raise AuditError(f"Step {t}: phase-end Update without an in-round delivery")
        leaks.add(round_index, site, (count - 1) // block_size + 1)
    return leaks


def _round_counts(item_log: ItemLog, t: int, round_index: Optional[int]) -> tuple[dict[int, int], int]:
    if round_index is None:
        rounds = [item_log.entry(step)[1] for step in range(1, t + 1)]
        round_index = max(rounds, default=-1)
    counts: dict[int, int] = {}
    block_size = 0
    for step in range(1, t + 1):
        site, r, count, size = item_log.entry(step)
        if site and r == round_index and r >= 0:
            counts[site] = count
            block_size = size
    return counts, block_size


def query_value(thresholds: Sequence[Sequence[int]], item_log: ItemLog, t: int, round_index: Optional[int] = None) -> float:
    """
    q_t(D): bits the sites of one round have sent by step t, divided by m = k k'.

    A block counts once its threshold item has arrived: every completed block,
    plus the open block when its offset has reached the threshold.

    Args:
        thresholds (Sequence[Sequence[int]]): The round's database D, one row of k' per site.
        item_log (ItemLog): Per-step item positions.
        t (int): Step, 0 for the empty prefix.
        round_index (Optional[int]): Round to evaluate; the latest round seen by step t when None.
    """
    k = len(thresholds)
    k_prime = len(thresholds[0]) if k else 0
    m = k * k_prime
    if t <= 0 or m == 0:
        return 0.0
    counts, block_size = _round_counts(item_log, t, round_index)
    bits = 0
    for site, count in counts.items():
        row = thresholds[site - 1]
        full, offset = divmod(count, block_size)
        if full >= k_prime:
            bits += k_prime
            continue
        bits += full
        if offset >= row[full]:
            bits += 1
    return bits / m
