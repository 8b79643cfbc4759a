from typing import Optional

from pydantic import Field

from app.schemas.base import TrackingBaseModel


class RoundSummary(TrackingBaseModel):
    """One completed or open round of a round-based tracker."""
    index: int
    n0: int
    block_size: int
    items: int = 0
    phase_bits: list[int] = Field(default_factory=list)
    phase_outputs: list[float] = Field(default_factory=list)
    end_reason: str = "open"  # 'phases', 'signal', 'doubled' or 'open'
    n_end: Optional[int] = None
    leak_set_size: Optional[int] = None

    @property
    def total_bits(self) -> int:
        return sum(self.phase_bits)


class Metrics(TrackingBaseModel):
    trial: int
    seed: int
    mechanism: str
    adversary: str
    k: int
    alpha: float
    delta: float
    n_items: int
    max_rel_error: float = 0.0
    failed: bool = False
    total_words: int = 0
    words_by_category: dict[str, int] = Field(default_factory=dict)
    bootstrap_words: int = 0
    rounds_completed: int = 0
    rounds: list[RoundSummary] = Field(default_factory=list)
    error_floor: int = 0
    error_samples: list[tuple[int, int, float]] = Field(default_factory=list)
    update_count: int = 0

    def csv_row(self) -> dict:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "mechanism": self.mechanism,
            "adversary": self.adversary,
            "k": self.k,
            "alpha": self.alpha,
            "delta": self.delta,
            "n_items": self.n_items,
            "max_rel_error": self.max_rel_error,
            "failed": self.failed,
            "total_words": self.total_words,
            "rounds": self.rounds_completed,
        }


class AggregateReport(TrackingBaseModel):
    mechanism: str
    adversary: str
    k: int
    alpha: float
    delta: float
    items: int
    trials: int
    seed: int
    failures: int
    failure_fraction: float
    failure_ci: tuple[float, float]
    mean_total_words: float
    max_total_words: int
    mean_rounds: float
    mean_round_growth: Optional[float] = None
    round_growth_in_band: Optional[float] = None
    round_bits_in_band: Optional[float] = None
    max_leak_set_size: Optional[int] = None
    communication_bound: Optional[float] = None
    per_trial: list[Metrics] = Field(default_factory=list, exclude=True)


class SweepRow(TrackingBaseModel):
    k: int
    alpha: float
    mechanism: str
    mean_total_words: float
    failure_fraction: float


class SweepReport(TrackingBaseModel):
    rows: list[SweepRow] = Field(default_factory=list)
    exponents: dict[str, Optional[float]] = Field(default_factory=dict)
    bounds: dict[str, list[float]] = Field(default_factory=dict)
