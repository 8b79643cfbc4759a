import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from app.errors import BootstrapRequired, ProtocolError
from app.schemas.metrics import RoundSummary
from app.services.base import TrackerBase
from app.services.noise import RngStream
from app.services.robust.server import ServerState, server_begin_round, server_on_bit
from app.services.robust.site import SiteMsg, SiteState, site_begin_round, site_receive_item
from app.services.tracking.core import Announcement, CommLedger, RoundParams, derive_round_params
from app.services.tracking.transcript import ItemContext

logger = logging.getLogger(__name__)


class TrackerMode(str, Enum):
    BOOTSTRAP = "bootstrap"
    NORMAL = "normal"


def end_round(server: ServerState, sites: Sequence[SiteState], ledger: CommLedger) -> int:
    """
    Closes a round: the server collects every site's exact counter.

    Returns:
        int: The exact total count, N0 plus all items the sites saw this round.
    """
    if server.closed:
        raise ProtocolError(f"Round {server.round_index} already ended")
    server.closed = True
    ledger.charge_sync(len(sites))
    return server.params.n0 + sum(site.count for site in sites)


@dataclass
class RobustTracker(TrackerBase):
    """
    Robust count tracker: sites fire one bit per block at a hidden random offset,
    the server releases phase counts through the Binary Mechanism.

    While the count is below the bootstrap threshold every item is forwarded
    and the server announces the exact count.

    Args:
        k (int): Number of sites.
        alpha (float): Target relative error.
        beta (float): Per-round failure probability.
        rng (RngStream): Root stream; each round derives ("round", r) from it.
        initial_count (int): Exact count before the first item.
        block_size (Optional[int]): Pins Delta of the first round.
        thresholds (Optional[list[list[int]]]): Pins the first round's threshold database.
        single_round (bool): Stop after the first normal round ends.
    """

    alpha: float = 0.1
    beta: float = 0.05
    rng: Optional[RngStream] = None
    initial_count: int = 0
    block_size: Optional[int] = None
    thresholds: Optional[list[list[int]]] = None
    single_round: bool = False

    mode: TrackerMode = field(default=TrackerMode.NORMAL, init=False)
    n_exact: int = field(default=0, init=False)
    round_index: int = field(default=-1, init=False)
    params: Optional[RoundParams] = field(default=None, init=False)
    server: Optional[ServerState] = field(default=None, init=False)
    sites: list[SiteState] = field(default_factory=list, init=False)

    def __post_init__(self):
        self.name = "robust"
        if self.rng is None:
            self.rng = RngStream(0)
        self.n_exact = self.initial_count
        self.last_value = float(self.initial_count)
        self._try_begin_round(self.block_size, self.thresholds)
        if self.mode is TrackerMode.BOOTSTRAP:
            logger.info(f"Starting in bootstrap mode at N={self.n_exact}")

    def _try_begin_round(
        self,
        block_size: Optional[int] = None,
        thresholds: Optional[list[list[int]]] = None,
    ) -> bool:
        try:
            params = derive_round_params(self.n_exact, self.k, self.alpha, self.beta, block_size)
        except BootstrapRequired:
            self.mode = TrackerMode.BOOTSTRAP
            return False
        self.mode = TrackerMode.NORMAL
        self.round_index += 1
        self.params = params
        round_rng = self.rng.child("round", self.round_index)
        self.sites = [
            site_begin_round(
                i,
                params,
                round_rng.child("site", i),
                thresholds[i - 1] if thresholds is not None else None,
            )
            for i in range(1, self.k + 1)
        ]
        self.server = server_begin_round(params, self.round_index, self.ledger, round_rng.child("server"))
        self.rounds.append(RoundSummary(index=self.round_index, n0=params.n0, block_size=params.block_size))
        return True

    def on_item(self, site: int) -> Announcement:
        if self.finished:
            raise ProtocolError("Item delivered after the tracked round ended")
        if self.mode is TrackerMode.BOOTSTRAP:
            return self._bootstrap_step()

        state = self.sites[site - 1]
        msg = site_receive_item(state)
        self.last_context = ItemContext(self.round_index, state.count, self.params.block_size)
        if msg is None:
            return Announcement.no_change(self.last_value)
        self.ledger.charge_up(1)
        if msg is SiteMsg.END_ROUND:
            return self._finish_round("signal")
        announcement = server_on_bit(self.server)
        if self.server.complete:
            return self._finish_round("phases")
        return announcement

    def _bootstrap_step(self) -> Announcement:
        self.ledger.charge_up(1)
        self.bootstrap_words += 1
        self.n_exact += 1
        self.last_context = None
        if self._try_begin_round():
            # the new N0 goes out to every site
            self.ledger.charge_broadcast(self.k)
            self.bootstrap_words += self.k
            logger.info(f"Bootstrap finished at N={self.n_exact}, Delta={self.params.block_size}")
        return Announcement.update(float(self.n_exact), sync=True)

    def _finish_round(self, reason: str) -> Announcement:
        server = self.server
        summary = self.rounds[-1]
        self.n_exact = end_round(server, self.sites, self.ledger)
        summary.items = self.n_exact - server.params.n0
        summary.phase_bits = list(server.phase_counts)
        if reason == "signal" and server.phase_bits:
            summary.phase_bits.append(server.phase_bits)
        summary.phase_outputs = list(server.outputs)
        summary.end_reason = reason
        summary.n_end = self.n_exact
        logger.debug(f"Round {self.round_index} ended by {reason} at N={self.n_exact}")
        if self.single_round:
            self.finished = True
        else:
            self._try_begin_round()
        return Announcement.update(float(self.n_exact), phase_end=reason == "phases", sync=True)

    def threshold_database(self) -> list[list[int]]:
        """Thresholds of the current round, one row per site."""
        return [list(site.thresholds) for site in self.sites]

    def summaries(self) -> list[RoundSummary]:
        if self.rounds and self.rounds[-1].end_reason == "open" and self.server is not None:
            open_round = self.rounds[-1]
            open_round.items = sum(site.count for site in self.sites)
            open_round.phase_bits = list(self.server.phase_counts) + [self.server.phase_bits]
            open_round.phase_outputs = list(self.server.outputs)
        return self.rounds
