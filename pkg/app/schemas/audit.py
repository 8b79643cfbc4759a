from typing import Optional

from pydantic import Field, model_validator

from app.schemas.base import TrackingBaseModel
from app.services.noise import NoiseMode
from app.settings import settings


class BmProbeReport(TrackingBaseModel):
    capacity: int
    eps: float
    trials: int
    bucket_width: float
    events_considered: int
    max_log_ratio: float
    lower_bound: float
    half_width: float
    violation: bool


class AuditConfig(TrackingBaseModel):
    """
    A small, fully pinned robust-tracker configuration for the partial-DP audit.

    `thresholds` is the database D, one list of k' thresholds per site; it is
    drawn from `seed` when omitted. `target` is the (site, block) position where
    D' differs from D; `identical` runs the control with D' = D.
    """

    k: int = 4
    block_size: int = Field(default=3, ge=1)
    beta: float = 0.05
    items: int = Field(default=64, ge=1)
    trials: int = Field(default=100_000, ge=1)
    seed: int = 7
    noise_mode: NoiseMode = NoiseMode.STANDARD
    initial_count: int = Field(default=1000, ge=0)
    target: Optional[tuple[int, int]] = None
    thresholds: Optional[list[list[int]]] = None
    target_value: Optional[int] = None
    identical: bool = False
    bucket_width: Optional[float] = None
    min_count: int = Field(default_factory=lambda: settings.AUDIT_MIN_COUNT, ge=1)

    @model_validator(mode="after")
    def check_target(self) -> "AuditConfig":
        if self.target is not None:
            site, block = self.target
            if not 1 <= site <= self.k or block < 1:
                raise ValueError(f"target {self.target} outside sites 1..{self.k}")
        if self.thresholds is not None:
            if len(self.thresholds) != self.k:
                raise ValueError(f"thresholds need one row per site ({self.k})")
            for row in self.thresholds:
                if any(not 1 <= r <= self.block_size for r in row):
                    raise ValueError(f"thresholds must lie in 1..{self.block_size}")
        if self.target_value is not None and not 1 <= self.target_value <= self.block_size:
            raise ValueError(f"target_value must lie in 1..{self.block_size}")
        return self


class AuditEventRow(TrackingBaseModel):
    event: str
    count_D: int
    count_D_prime: int
    log_ratio: float
    ci_low: float
    ci_high: float
    verdict: str


class AuditReport(TrackingBaseModel):
    k: int
    block_size: int
    target: tuple[int, int]
    trials: int
    surviving_D: int
    surviving_D_prime: int
    epsilon_bound: float
    max_log_ratio: float
    max_lower_bound: float
    verdict: str  # 'pass', 'violation' or 'inconclusive'
    events: list[AuditEventRow] = Field(default_factory=list)
