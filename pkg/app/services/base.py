from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional

from app.errors import ParameterError
from app.schemas.metrics import RoundSummary
from app.services.tracking.core import Announcement, CommLedger, StepAction
from app.services.tracking.transcript import ItemContext


@dataclass
class TrackerBase(ABC):
    """
    Base class for every count-tracking mechanism driven by the harness.

    A mechanism is event-driven: its state changes only when an item is
    delivered. Skips return the previous announcement unchanged.

    Args:
        k (int): Number of sites.
    Attributes:
        ledger (CommLedger): Words exchanged so far.
        rounds (list[RoundSummary]): Round history, the open round last.
        last_context (Optional[ItemContext]): Where the most recent item landed.
    """

    k: int
    ledger: CommLedger = field(default_factory=CommLedger, init=False)
    rounds: list[RoundSummary] = field(default_factory=list, init=False)
    last_value: float = field(default=0.0, init=False)
    last_context: Optional[ItemContext] = field(default=None, init=False)
    bootstrap_words: int = field(default=0, init=False)
    finished: bool = field(default=False, init=False)

    name: str = field(default="tracker", init=False)

    def process(self, action: StepAction) -> Announcement:
        """
        Runs one step of the game.

        Args:
            action (StepAction): The adversary's move.

        Returns:
            Announcement: What the server shows after the step.

        Raises:
            ParameterError: If the target site does not exist.
        """
        if action.is_skip:
            self.last_context = None
            return Announcement.no_change(self.last_value)
        site = action.site
        if not 1 <= site <= self.k:
            raise ParameterError(f"Site {site} outside 1..{self.k}")
        announcement = self.on_item(site)
        self.last_value = announcement.value
        return announcement

    @abstractmethod
    def on_item(self, site: int) -> Announcement:
        """Handles one item arriving at `site` and returns the server's announcement."""

    @property
    def rounds_completed(self) -> int:
        return sum(1 for r in self.rounds if r.end_reason != "open")

    def summaries(self) -> list[RoundSummary]:
        """Round history with the open round's progress filled in."""
        return self.rounds
