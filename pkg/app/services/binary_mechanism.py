"""
Binary Mechanism for privately releasing running sums of a length-L stream.

Each input lands in the dyadic partial sum of the lowest set bit of the step
counter; the release at step t adds up the noisy partial sums indexed by the
set bits of t. All logarithms are base 2.
"""
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from app.errors import CapacityError, ParameterError
from app.schemas.audit import BmProbeReport
from app.services.noise import NoiseMode, RngStream, derive_stream, laplace
from app.settings import settings
from app.utils.utils import log_ratio_interval


@dataclass
class BmState:
    """
    State of one Binary Mechanism instance.

    Args:
        capacity (int): Stream length L.
        eps (float): Total privacy parameter.
        eps_prime (float): Per-level budget eps / max(1, ceil(log2 L)).
    """

    capacity: int
    eps: float
    eps_prime: float
    t: int = 0
    levels: list[float] = field(default_factory=list)
    noisy_levels: list[float] = field(default_factory=list)

    @property
    def level_count(self) -> int:
        return len(self.levels)


def bm_new(capacity: int, eps: float) -> BmState:
    """
    Fresh Binary Mechanism with all partial sums at zero.

    Args:
        capacity (int): Stream length L >= 1.
        eps (float): Privacy parameter > 0.

    Returns:
        BmState: State with t = 0 and ceil(log2 L) + 1 levels at most.

    Raises:
        ParameterError: If L < 1 or eps <= 0.
    """
    if capacity < 1:
        raise ParameterError(f"Binary Mechanism capacity must be >= 1, got {capacity}")
    if not eps > 0:
        raise ParameterError(f"Binary Mechanism eps must be positive, got {eps}")
    depth = max(1, math.ceil(math.log2(capacity)))
    n_levels = capacity.bit_length()
    return BmState(
        capacity=capacity,
        eps=eps,
        eps_prime=eps / depth,
        levels=[0.0] * n_levels,
        noisy_levels=[0.0] * n_levels,
    )


def bm_feed(state: BmState, x: float, rng: RngStream) -> float:
    """
    Feeds the next input and returns the noisy running sum B(t).

    Args:
        state (BmState): Mechanism state, mutated in place.
        x (float): Next input; per-position changes of at most 1 are what the
            privacy guarantee covers.
        rng (RngStream): Stream for the level noise.

    Returns:
        float: Sum of the noisy partial sums indexed by the set bits of t.

    Raises:
        CapacityError: If the mechanism already consumed L inputs.
    """
    if state.t >= state.capacity:
        raise CapacityError(f"Binary Mechanism of capacity {state.capacity} is full")
    state.t += 1
    t = state.t
    i = (t & -t).bit_length() - 1
    state.levels[i] = sum(state.levels[:i]) + x
    for j in range(i):
        state.levels[j] = 0.0
        state.noisy_levels[j] = 0.0
    state.noisy_levels[i] = state.levels[i] + laplace(rng, 1.0 / state.eps_prime)
    return sum(state.noisy_levels[j] for j in range(state.level_count) if (t >> j) & 1)


def _check_neighbours(stream_a: Sequence[float], stream_b: Sequence[float], capacity: int):
    if len(stream_a) != len(stream_b):
        raise ParameterError("Probe streams must have equal length")
    if len(stream_a) > capacity:
        raise ParameterError(f"Probe streams longer than capacity {capacity}")
    differing = [i for i, (a, b) in enumerate(zip(stream_a, stream_b)) if a != b]
    if len(differing) > 1:
        raise ParameterError(f"Probe streams differ in {len(differing)} positions, at most 1 allowed")
    if differing and abs(stream_a[differing[0]] - stream_b[differing[0]]) > 1:
        raise ParameterError("Probe streams differ by more than 1 at the differing position")


def _bucketed_outputs(
    capacity: int, eps: float, stream: Sequence[float], rng: RngStream, width: float
) -> list[tuple[int, int]]:
    state = bm_new(capacity, eps)
    return [(t, math.floor(bm_feed(state, x, rng) / width)) for t, x in enumerate(stream, start=1)]


def bm_privacy_probe(
    capacity: int,
    eps: float,
    stream_a: Sequence[float],
    stream_b: Sequence[float],
    trials: int,
    bucket_width: Optional[float] = None,
    seed: int = 0,
    noise_mode: NoiseMode = NoiseMode.STANDARD,
    min_count: Optional[int] = None,
) -> BmProbeReport:
    """
    Monte-Carlo estimate of the largest log-ratio Pr_a[E] / Pr_b[E].

    Events are per-step marginal buckets {B(t) in [b*w, (b+1)*w)}. An event
    enters the maximum once either side saw it at least `min_count` times.

    Args:
        capacity (int): Stream length L.
        eps (float): Privacy parameter of the probed mechanism.
        stream_a (Sequence[float]): First input stream.
        stream_b (Sequence[float]): Neighbouring input stream.
        trials (int): Runs per stream.
        bucket_width (Optional[float]): Output grid width, settings default when None.
        seed (int): Master seed of the probe.
        noise_mode (NoiseMode): Disabled gives the no-privacy control.
        min_count (Optional[int]): Minimum hits for an event to be considered.

    Returns:
        BmProbeReport: Estimate, 95% half-width and the violation verdict.

    Raises:
        ParameterError: If the streams are not neighbours or trials < 1.
    """
    if trials < 1:
        raise ParameterError(f"Probe needs at least one trial, got {trials}")
    _check_neighbours(stream_a, stream_b, capacity)
    width = bucket_width if bucket_width is not None else settings.BM_PROBE_BUCKET_WIDTH
    if not width > 0:
        raise ParameterError(f"Bucket width must be positive, got {width}")
    threshold = min_count if min_count is not None else settings.BM_PROBE_MIN_COUNT

    root = derive_stream(seed, (("bm_probe", 0),), noise_mode)
    counts_a: Counter = Counter()
    counts_b: Counter = Counter()
    for trial in range(trials):
        counts_a.update(_bucketed_outputs(capacity, eps, stream_a, root.child("a", trial), width))
        counts_b.update(_bucketed_outputs(capacity, eps, stream_b, root.child("b", trial), width))

    best_estimate = 0.0
    best_lower = -math.inf
    best_upper = 0.0
    considered = 0
    for event in sorted(set(counts_a) | set(counts_b)):
        ca, cb = counts_a[event], counts_b[event]
        if max(ca, cb) < threshold:
            continue
        considered += 1
        for num, den in ((ca, cb), (cb, ca)):
            estimate, lower, upper = log_ratio_interval(num, den, trials, trials)
            if lower > best_lower or (lower == best_lower and estimate > best_estimate):
                best_estimate, best_lower, best_upper = estimate, lower, upper

    if considered == 0:
        best_lower = 0.0
    half_width = (best_upper - best_lower) / 2 if math.isfinite(best_upper - best_lower) else math.inf
    return BmProbeReport(
        capacity=capacity,
        eps=eps,
        trials=trials,
        bucket_width=width,
        events_considered=considered,
        max_log_ratio=best_estimate,
        lower_bound=best_lower,
        half_width=half_width,
        violation=best_lower > eps,
    )
