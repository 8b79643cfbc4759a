"""
Server side of the robust tracker for one round.

The round has s phases. A phase counts incoming bits until the count reaches
a noisy threshold T + Lap(4 / eps); the phase count is then fed to a Binary
Mechanism (length s, budget eps / 4) and the released running sum, scaled by
Delta and shifted by N0, becomes the new announcement.
"""
from dataclasses import dataclass, field
from typing import Optional

from app.errors import ProtocolError
from app.services.binary_mechanism import BmState, bm_feed, bm_new
from app.services.noise import RngStream, laplace
from app.services.tracking.core import Announcement, CommLedger, RoundParams


@dataclass
class ServerState:
    params: RoundParams
    round_index: int
    ledger: CommLedger
    threshold_rng: RngStream
    bm_rng: RngStream
    bm: BmState
    noisy_threshold: float
    a_prev: float
    phase: int = 1
    phase_bits: int = 0
    phase_counts: list[int] = field(default_factory=list)
    outputs: list[float] = field(default_factory=list)
    complete: bool = False
    closed: bool = False


def server_begin_round(
    params: RoundParams, round_index: int, ledger: CommLedger, rng: RngStream
) -> ServerState:
    threshold_rng = rng.child("threshold")
    bm_rng = rng.child("bm")
    return ServerState(
        params=params,
        round_index=round_index,
        ledger=ledger,
        threshold_rng=threshold_rng,
        bm_rng=bm_rng,
        bm=bm_new(params.s, params.eps / 4.0),
        noisy_threshold=params.phase_threshold + laplace(threshold_rng, 4.0 / params.eps),
        a_prev=float(params.n0),
    )


def server_on_bit(state: ServerState, rng: Optional[RngStream] = None) -> Announcement:
    """
    Counts one bit and returns the announcement it produces.

    Args:
        state (ServerState): Server state, mutated in place.
        rng (Optional[RngStream]): Threshold-noise stream, the state's own when None.

    Returns:
        Announcement: NoChange while the phase count is below the noisy
        threshold, otherwise an Update carrying max(0, b_j * Delta + N0).

    Raises:
        ProtocolError: If the round already ended.
    """
    if state.closed or state.complete:
        raise ProtocolError(f"Bit received after the end of round {state.round_index}")
    state.phase_bits += 1
    if state.phase_bits < state.noisy_threshold:
        return Announcement.no_change(state.a_prev)

    params = state.params
    released = bm_feed(state.bm, state.phase_bits, state.bm_rng)
    state.a_prev = max(0.0, released * params.block_size + params.n0)
    state.phase_counts.append(state.phase_bits)
    state.outputs.append(state.a_prev)
    if state.phase >= params.s:
        state.complete = True
    else:
        state.phase += 1
        state.phase_bits = 0
        noise_rng = rng if rng is not None else state.threshold_rng
        state.noisy_threshold = params.phase_threshold + laplace(noise_rng, 4.0 / params.eps)
    return Announcement.update(state.a_prev, phase_end=True)
