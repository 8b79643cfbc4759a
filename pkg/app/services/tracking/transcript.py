"""
Transcript of the two-player game and the companion item log.

Entries are stored column-wise in compact arrays; a trial can run to millions
of steps.
"""
from array import array
from dataclasses import dataclass
from typing import Iterator, Optional

from app.errors import ProtocolError
from app.services.tracking.core import Announcement, StepAction, Tag

_UPDATE = 1
_PHASE_END = 2
_SYNC = 4


def _encode(announcement: Announcement) -> int:
    flags = _UPDATE if announcement.tag is Tag.UPDATE else 0
    if announcement.phase_end:
        flags |= _PHASE_END
    if announcement.sync:
        flags |= _SYNC
    return flags


def _decode(flags: int, value: float) -> Announcement:
    return Announcement(
        Tag.UPDATE if flags & _UPDATE else Tag.NO_CHANGE,
        value,
        bool(flags & _PHASE_END),
        bool(flags & _SYNC),
    )


class Transcript:
    """
    Ordered (StepAction, Announcement) pairs plus the true total count N_t.

    Appending enforces the transcript invariants: N_t grows by one exactly on
    Deliver and a NoChange announcement repeats the previous value.
    """

    def __init__(self, initial_count: int = 0):
        self.initial_count = initial_count
        self._sites = array("l")
        self._flags = array("b")
        self._values = array("d")
        self._counts = array("q")
        self._last: Optional[Announcement] = None

    def __len__(self) -> int:
        return len(self._sites)

    def append(self, action: StepAction, announcement: Announcement, true_count: int):
        previous_count = self._counts[-1] if self._counts else self.initial_count
        expected = previous_count if action.is_skip else previous_count + 1
        if true_count != expected:
            raise ProtocolError(f"True count {true_count} at step {len(self) + 1}, expected {expected}")
        if announcement.tag is Tag.NO_CHANGE:
            previous_value = self._last.value if self._last is not None else announcement.value
            if announcement.value != previous_value:
                raise ProtocolError(
                    f"NoChange at step {len(self) + 1} shows {announcement.value}, previous {previous_value}"
                )
        self._sites.append(action.site)
        self._flags.append(_encode(announcement))
        self._values.append(announcement.value)
        self._counts.append(true_count)
        self._last = announcement

    def action(self, t: int) -> StepAction:
        """Action of step t (1-based)."""
        site = self._sites[t - 1]
        return StepAction.skip() if site == 0 else StepAction.deliver(site)

    def announcement(self, t: int) -> Announcement:
        return _decode(self._flags[t - 1], self._values[t - 1])

    def true_count(self, t: int) -> int:
        return self._counts[t - 1]

    def entries(self) -> Iterator[tuple[StepAction, Announcement, int]]:
        for t in range(1, len(self) + 1):
            yield self.action(t), self.announcement(t), self._counts[t - 1]

    def update_steps(self) -> list[int]:
        return [t for t, flags in enumerate(self._flags, start=1) if flags & _UPDATE]

    def phase_end_steps(self) -> list[int]:
        return [t for t, flags in enumerate(self._flags, start=1) if flags & _PHASE_END]

    def values(self) -> array:
        return self._values

    def true_counts(self) -> array:
        return self._counts

    @property
    def last_announcement(self) -> Optional[Announcement]:
        return self._last

    def view(self) -> "TranscriptView":
        return TranscriptView(self)


class TranscriptView:
    """
    The part of a transcript an adversary may see: its own actions and the announcements.
    """

    __slots__ = ("_transcript",)

    def __init__(self, transcript: Transcript):
        self._transcript = transcript

    def __len__(self) -> int:
        return len(self._transcript)

    @property
    def last_announcement(self) -> Optional[Announcement]:
        return self._transcript.last_announcement

    @property
    def last_action(self) -> Optional[StepAction]:
        n = len(self._transcript)
        return self._transcript.action(n) if n else None

    def action(self, t: int) -> StepAction:
        return self._transcript.action(t)

    def announcement(self, t: int) -> Announcement:
        return self._transcript.announcement(t)


@dataclass(frozen=True, slots=True)
class ItemContext:
    """Where a delivered item landed: the round, the site's round count after it, Delta."""

    round_index: int
    site_count: int
    block_size: int


class ItemLog:
    """Per-step (site, round, per-site round count, Delta); site 0 marks a skip."""

    def __init__(self):
        self._sites = array("l")
        self._rounds = array("l")
        self._site_counts = array("q")
        self._block_sizes = array("q")

    def __len__(self) -> int:
        return len(self._sites)

    def append(self, site: int, context: Optional[ItemContext]):
        self._sites.append(site)
        if context is None:
            self._rounds.append(-1)
            self._site_counts.append(0)
            self._block_sizes.append(0)
        else:
            self._rounds.append(context.round_index)
            self._site_counts.append(context.site_count)
            self._block_sizes.append(context.block_size)

    def entry(self, t: int) -> tuple[int, int, int, int]:
        """(site, round_index, site_count, block_size) of step t (1-based)."""
        i = t - 1
        return self._sites[i], self._rounds[i], self._site_counts[i], self._block_sizes[i]
