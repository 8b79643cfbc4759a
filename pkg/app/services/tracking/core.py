"""
Shared domain types, round-parameter derivation and word accounting.

Unspecified logarithms are base 2 and every occurrence of sqrt(k) uses
s = ceil(sqrt(k)).
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from app.errors import BootstrapRequired, ParameterError
from app.utils.utils import ceil_sqrt


@dataclass(frozen=True, slots=True)
class ItemEvent:
    site_id: int


@dataclass(frozen=True, slots=True)
class StepAction:
    """Deliver one item to a site, or skip the step (item is None)."""

    item: Optional[ItemEvent] = None

    @classmethod
    def deliver(cls, site_id: int) -> "StepAction":
        return cls(ItemEvent(site_id))

    @classmethod
    def skip(cls) -> "StepAction":
        return cls(None)

    @property
    def is_skip(self) -> bool:
        return self.item is None

    @property
    def site(self) -> int:
        return 0 if self.item is None else self.item.site_id


class Tag(str, Enum):
    NO_CHANGE = "no_change"
    UPDATE = "update"


@dataclass(frozen=True, slots=True)
class Announcement:
    """
    What the server shows after a step.

    `phase_end` marks an Update released because a phase crossed its noisy
    threshold; `sync` marks an exact count (round broadcast or bootstrap).
    """

    tag: Tag
    value: float
    phase_end: bool = False
    sync: bool = False

    @classmethod
    def no_change(cls, value: float) -> "Announcement":
        return cls(Tag.NO_CHANGE, value)

    @classmethod
    def update(cls, value: float, phase_end: bool = False, sync: bool = False) -> "Announcement":
        return cls(Tag.UPDATE, value, phase_end, sync)

    @property
    def is_update(self) -> bool:
        return self.tag is Tag.UPDATE


@dataclass(frozen=True)
class RoundParams:
    """
    Per-round constants of the robust tracker.

    Attributes:
        n0 (int): Exact count at round start (N0).
        k (int): Number of sites.
        s (int): ceil(sqrt(k)), also the number of phases and the BM length.
        alpha (float): Target relative error.
        beta (float): Per-round failure probability.
        c_factor (float): C = sqrt(((log2 s)^1.5 + 1) * log2(8 s / beta)).
        block_size (int): Delta = max(1, floor(alpha N0 / (8 C s))).
        eps (float): C / s.
        phase_threshold (float): T = 2 C s.
        k_prime (int): ceil(C k), thresholds drawn per site.
    """

    n0: int
    k: int
    s: int
    alpha: float
    beta: float
    c_factor: float
    block_size: int
    eps: float
    phase_threshold: float
    k_prime: int


def compute_c_factor(s: int, beta: float) -> float:
    log_s = math.log2(s) if s > 1 else 0.0
    return math.sqrt((log_s ** 1.5 + 1.0) * math.log2(8.0 * s / beta))


def _check_ranges(k: int, alpha: float, beta: float):
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")


def bootstrap_threshold(k: int, alpha: float, beta: float) -> int:
    """
    Smallest N0 for which alpha * N0 / (8 C s) >= 1, i.e. a normal round can start.
    """
    _check_ranges(k, alpha, beta)
    s = ceil_sqrt(k)
    return math.ceil(8.0 * compute_c_factor(s, beta) * s / alpha)


def derive_round_params(
    n0: int,
    k: int,
    alpha: float,
    beta: float,
    block_size: Optional[int] = None,
) -> RoundParams:
    """
    Derives every per-round constant from the round's starting count.

    Args:
        n0 (int): Exact count at round start.
        k (int): Number of sites.
        alpha (float): Target relative error in (0, 1).
        beta (float): Per-round failure probability in (0, 1).
        block_size (Optional[int]): Pins Delta instead of deriving it (audits, traces).

    Returns:
        RoundParams: The round constants.

    Raises:
        ParameterError: If a parameter is out of range.
        BootstrapRequired: If the derived Delta would be below one item.
    """
    _check_ranges(k, alpha, beta)
    if n0 < 0:
        raise ParameterError(f"N0 must be nonnegative, got {n0}")
    s = ceil_sqrt(k)
    c_factor = compute_c_factor(s, beta)
    if block_size is None:
        exact = alpha * n0 / (8.0 * c_factor * s)
        if exact < 1.0:
            raise BootstrapRequired(math.ceil(8.0 * c_factor * s / alpha))
        block_size = max(1, math.floor(exact))
    elif block_size < 1:
        raise ParameterError(f"block size must be >= 1, got {block_size}")
    return RoundParams(
        n0=n0,
        k=k,
        s=s,
        alpha=alpha,
        beta=beta,
        c_factor=c_factor,
        block_size=block_size,
        eps=c_factor / s,
        phase_threshold=2.0 * c_factor * s,
        k_prime=math.ceil(c_factor * k),
    )


def derive_global_beta(delta: float, alpha: float, k: int, n_max: int) -> float:
    """
    Per-round failure probability so that a union bound over all rounds gives delta.

    beta = delta / (s * max(1, ceil(log2(N_max) / (alpha * s)))), the O-constant
    of the round count taken as 1.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    s = ceil_sqrt(k)
    log_n = math.log2(n_max) if n_max > 1 else 0.0
    rounds = max(1, math.ceil(log_n / (alpha * s)))
    return delta / (s * rounds)


def communication_bound(
    mechanism: str, k: int, alpha: float, n: int, c_factor: Optional[float] = None
) -> float:
    """
    Asymptotic word bound with all hidden constants set to 1.

    robust: C s log N / alpha, plus C k log N once k > 1/alpha^2;
    deterministic: k log N / alpha; oblivious: s log N / alpha.
    """
    s = ceil_sqrt(k)
    log_n = math.log2(max(n, 2))
    if mechanism == "deterministic":
        return k * log_n / alpha
    if mechanism == "oblivious":
        return s * log_n / alpha
    c = c_factor if c_factor is not None else 1.0
    bound = c * s * log_n / alpha
    if k > 1.0 / (alpha * alpha):
        bound += c * k * log_n
    return bound


@dataclass
class CommLedger:
    """Words exchanged so far, one counter per direction."""

    site_to_server: int = 0
    server_to_site: int = 0
    broadcast: int = 0

    def total(self) -> int:
        return self.site_to_server + self.server_to_site + self.broadcast

    def charge_up(self, words: int = 1):
        self.site_to_server += words

    def charge_down(self, words: int = 1):
        self.server_to_site += words

    def charge_broadcast(self, words: int):
        self.broadcast += words

    def charge_sync(self, k: int):
        """End-of-round collection: k notifications, k counters up, k broadcast words."""
        self.server_to_site += k
        self.site_to_server += k
        self.broadcast += k

    def as_dict(self) -> dict[str, int]:
        return {
            "site_to_server": self.site_to_server,
            "server_to_site": self.server_to_site,
            "broadcast": self.broadcast,
        }
