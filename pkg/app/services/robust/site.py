"""
Site side of the robust tracker for one round.

A site cuts its stream into blocks of Delta items. Block j carries a threshold
r[j] uniform on {1, ..., Delta}; the site sends one bit on the r[j]-th item of
the block. Once more than k' blocks would be needed it asks the server to end
the round.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from app.errors import ParameterError
from app.services.noise import RngStream, uniform_thresholds
from app.services.tracking.core import RoundParams


class SiteMsg(str, Enum):
    BIT = "bit"
    END_ROUND = "end_round"


@dataclass
class SiteState:
    site_id: int
    params: RoundParams
    thresholds: list[int]
    count: int = 0
    fired: bytearray = field(default_factory=bytearray)

    def __post_init__(self):
        if not self.fired:
            self.fired = bytearray(len(self.thresholds))

    @property
    def bits_sent(self) -> int:
        return sum(self.fired)


def site_begin_round(
    site_id: int,
    params: RoundParams,
    rng: RngStream,
    thresholds: Optional[Sequence[int]] = None,
) -> SiteState:
    """
    Fresh site state with k' thresholds.

    Args:
        site_id (int): Site index in 1..k.
        params (RoundParams): Round constants.
        rng (RngStream): The site's stream for this round.
        thresholds (Optional[Sequence[int]]): Pinned thresholds instead of fresh draws.

    Raises:
        ParameterError: If pinned thresholds do not match k' or leave 1..Delta.
    """
    if thresholds is None:
        drawn = uniform_thresholds(rng, params.block_size, params.k_prime).tolist()
    else:
        drawn = [int(r) for r in thresholds]
        if len(drawn) != params.k_prime:
            raise ParameterError(f"Site {site_id} needs {params.k_prime} thresholds, got {len(drawn)}")
        if any(not 1 <= r <= params.block_size for r in drawn):
            raise ParameterError(f"Site {site_id} thresholds must lie in 1..{params.block_size}")
    return SiteState(site_id=site_id, params=params, thresholds=drawn)


def site_receive_item(state: SiteState) -> Optional[SiteMsg]:
    """
    Counts one item and returns the message it triggers, if any.

    The item is the o-th of block j where j = (c - 1) // Delta + 1 and
    o = (c - 1) % Delta + 1.
    """
    state.count += 1
    block, offset = divmod(state.count - 1, state.params.block_size)
    if block >= state.params.k_prime:
        return SiteMsg.END_ROUND
    if offset + 1 == state.thresholds[block] and not state.fired[block]:
        state.fired[block] = 1
        return SiteMsg.BIT
    return None
