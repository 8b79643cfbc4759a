"""
Adaptive adversaries that pick each item after reading the announcements.
"""
from dataclasses import dataclass, field
from typing import Optional

from app.services.adversaries.base import Adversary
from app.services.tracking.core import Announcement, StepAction
from app.services.tracking.transcript import TranscriptView


def _reveals_bit(announcement: Optional[Announcement]) -> bool:
    # a pure sync broadcast is the exact count and says nothing about one site's threshold
    if announcement is None or not announcement.is_update:
        return False
    return announcement.phase_end or not announcement.sync


@dataclass
class StopOnFire(Adversary):
    """
    Feeds one site until an Update follows its delivery, then moves to the next site.

    Against a tracker that announces every bit this leaves each fired block
    under-filled, so the estimate credits Delta items where only r arrived.
    """

    current: int = field(default=1, init=False)

    def choose(self, view: TranscriptView) -> StepAction:
        last = view.last_action
        if last is not None and not last.is_skip and view.last_announcement.is_update:
            self.current = last.site % self.k + 1
        return StepAction.deliver(self.current)

    @property
    def label(self) -> str:
        return "stop_on_fire"


@dataclass
class UpdateChaser(Adversary):
    """
    Sends every item to the site whose delivery most recently produced a
    threshold-revealing Update; round-robin until the first one.
    """

    target: Optional[int] = field(default=None, init=False)

    def choose(self, view: TranscriptView) -> StepAction:
        last = view.last_action
        if last is not None and not last.is_skip and _reveals_bit(view.last_announcement):
            self.target = last.site
        if self.target is None:
            return StepAction.deliver(self.delivered % self.k + 1)
        return StepAction.deliver(self.target)

    @property
    def label(self) -> str:
        return "update_chaser"
