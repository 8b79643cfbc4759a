"""
Oblivious randomized baseline.

Same block-and-threshold structure as the robust tracker but with a coarser
block size Delta = max(1, floor(alpha N0 / (c0 s))), thresholds drawn when a
block opens, and every bit answered with an Update m * Delta + N0. A round
ends when that estimate reaches 2 N0.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

from app.errors import ParameterError
from app.schemas.metrics import RoundSummary
from app.services.base import TrackerBase
from app.services.noise import RngStream, uniform_threshold
from app.services.tracking.core import Announcement
from app.services.tracking.transcript import ItemContext
from app.settings import settings
from app.utils.utils import ceil_sqrt


def oblivious_block_size(n0: int, k: int, alpha: float, c0: float) -> int:
    return max(1, math.floor(alpha * n0 / (c0 * ceil_sqrt(k))))


@dataclass
class ObliviousTracker(TrackerBase):
    alpha: float = 0.1
    c0: float = field(default_factory=lambda: settings.OBLIVIOUS_C0)
    rng: Optional[RngStream] = None
    initial_count: int = 0

    n0: int = field(default=0, init=False)
    block_size: int = field(default=1, init=False)
    bits: int = field(default=0, init=False)
    round_index: int = field(default=-1, init=False)
    counts: list[int] = field(default_factory=list, init=False)
    thresholds: list[int] = field(default_factory=list, init=False)
    site_rngs: list[RngStream] = field(default_factory=list, init=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.c0 > 0:
            raise ParameterError(f"c0 must be positive, got {self.c0}")
        self.name = "oblivious"
        if self.rng is None:
            self.rng = RngStream(0)
        self.last_value = float(self.initial_count)
        self._begin_round(self.initial_count)

    def _begin_round(self, n0: int):
        self.round_index += 1
        self.n0 = n0
        self.block_size = oblivious_block_size(n0, self.k, self.alpha, self.c0)
        self.bits = 0
        self.counts = [0] * self.k
        self.thresholds = [0] * self.k
        round_rng = self.rng.child("round", self.round_index)
        self.site_rngs = [round_rng.child("site", i) for i in range(1, self.k + 1)]
        self.rounds.append(RoundSummary(index=self.round_index, n0=n0, block_size=self.block_size))

    def on_item(self, site: int) -> Announcement:
        i = site - 1
        self.counts[i] += 1
        offset = (self.counts[i] - 1) % self.block_size
        if offset == 0:
            self.thresholds[i] = uniform_threshold(self.site_rngs[i], self.block_size)
        self.last_context = ItemContext(self.round_index, self.counts[i], self.block_size)
        if offset + 1 != self.thresholds[i]:
            return Announcement.no_change(self.last_value)

        self.ledger.charge_up(1)
        self.bits += 1
        estimate = self.bits * self.block_size + self.n0
        if estimate >= 2 * self.n0:
            return self._finish_round()
        return Announcement.update(float(estimate))

    def _finish_round(self) -> Announcement:
        n_end = self.n0 + sum(self.counts)
        self.ledger.charge_sync(self.k)
        summary = self.rounds[-1]
        summary.items = n_end - self.n0
        summary.phase_bits = [self.bits]
        summary.end_reason = "doubled"
        summary.n_end = n_end
        self._begin_round(n_end)
        return Announcement.update(float(n_end), sync=True)

    def summaries(self) -> list[RoundSummary]:
        if self.rounds:
            self.rounds[-1].items = sum(self.counts)
            self.rounds[-1].phase_bits = [self.bits]
        return self.rounds
