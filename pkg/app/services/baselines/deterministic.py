"""
Deterministic baseline: each site reports its exact count whenever it has
grown by a factor (1 + alpha) since the last report.
"""
from dataclasses import dataclass, field
from typing import Optional

from app.errors import ParameterError
from app.services.base import TrackerBase
from app.services.tracking.core import Announcement
from app.services.tracking.transcript import ItemContext


@dataclass
class DetSiteState:
    count: int = 0
    last_reported: int = 0


def det_step(state: DetSiteState, alpha: float) -> Optional[int]:
    """
    Counts one item at a site.

    Returns:
        Optional[int]: The count to report, or None when the site stays silent.
    """
    state.count += 1
    if state.count == 1 or state.count >= (1.0 + alpha) * state.last_reported:
        state.last_reported = state.count
        return state.count
    return None


def det_estimate(sites: list[DetSiteState]) -> int:
    return sum(site.last_reported for site in sites)


@dataclass
class DeterministicTracker(TrackerBase):
    """
    Exact per-site reports on (1 + alpha) growth.

    `initial_count` items are treated as already synced: the estimate starts
    there and site counts start at zero.
    """

    alpha: float = 0.1
    initial_count: int = 0
    sites: list[DetSiteState] = field(default_factory=list, init=False)
    estimate: int = field(default=0, init=False)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.initial_count < 0:
            raise ParameterError(f"initial_count must be >= 0, got {self.initial_count}")
        self.name = "deterministic"
        self.sites = [DetSiteState() for _ in range(self.k)]
        self.estimate = self.initial_count
        self.last_value = float(self.initial_count)

    def on_item(self, site: int) -> Announcement:
        state = self.sites[site - 1]
        previous = state.last_reported
        report = det_step(state, self.alpha)
        self.last_context = ItemContext(0, state.count, 0)
        if report is None:
            return Announcement.no_change(self.last_value)
        self.ledger.charge_up(1)
        self.estimate += report - previous
        return Announcement.update(float(self.estimate))
