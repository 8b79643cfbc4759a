from enum import Enum
from typing import Literal, Optional

from pydantic import Field, field_validator, model_validator

from app.schemas.base import TrackingBaseModel
from app.services.noise import NoiseMode
from app.settings import settings


class MechanismKind(str, Enum):
    ROBUST = "robust"
    OBLIVIOUS = "oblivious"
    DETERMINISTIC = "deterministic"


class AdversarySpec(TrackingBaseModel):
    """
    Which input strategy drives a trial.

    Written on the command line as `replay:round_robin`, `replay:single_site:2`,
    `replay:weighted:0.5,0.25,0.25`, `stop_on_fire` or `update_chaser`.
    """

    kind: Literal["replay", "stop_on_fire", "update_chaser"] = "replay"
    schedule: Optional[Literal["round_robin", "single_site", "weighted"]] = None
    site: Optional[int] = None
    weights: Optional[list[float]] = None

    @classmethod
    def parse(cls, text: str) -> "AdversarySpec":
        parts = text.strip().split(":")
        kind = parts[0]
        if kind != "replay":
            if len(parts) > 1:
                raise ValueError(f"adversary '{kind}' takes no arguments")
            return cls(kind=kind)
        schedule = parts[1] if len(parts) > 1 else "round_robin"
        if schedule == "single_site":
            site = int(parts[2]) if len(parts) > 2 else 1
            return cls(kind=kind, schedule=schedule, site=site)
        if schedule == "weighted":
            if len(parts) < 3:
                raise ValueError("weighted schedule needs comma separated weights")
            return cls(kind=kind, schedule=schedule, weights=[float(w) for w in parts[2].split(",")])
        return cls(kind=kind, schedule=schedule)

    @model_validator(mode="after")
    def check_schedule(self) -> "AdversarySpec":
        if self.kind == "replay" and self.schedule is None:
            self.schedule = "round_robin"
        if self.weights is not None and (any(w < 0 for w in self.weights) or sum(self.weights) <= 0):
            raise ValueError("weights must be nonnegative with a positive sum")
        return self

    @property
    def label(self) -> str:
        if self.kind != "replay":
            return self.kind
        if self.schedule == "single_site":
            return f"replay:single_site:{self.site}"
        if self.schedule == "weighted":
            return "replay:weighted:" + ",".join(f"{w:g}" for w in self.weights)
        return f"replay:{self.schedule}"


class ExperimentConfig(TrackingBaseModel):
    mechanism: MechanismKind = MechanismKind.ROBUST
    adversary: AdversarySpec = Field(default_factory=AdversarySpec)
    k: int = 16
    alpha: float = 0.1
    delta: float = 0.05
    items: int = Field(default=1_000_000, ge=0)
    trials: int = Field(default=100, ge=1)
    seed: int = 42
    noise_mode: NoiseMode = NoiseMode.STANDARD
    c0: float = Field(default_factory=lambda: settings.OBLIVIOUS_C0, gt=0)
    initial_count: int = Field(default=0, ge=0)
    error_checkpoints: int = Field(default_factory=lambda: settings.ERROR_CHECKPOINTS, ge=0)

    @field_validator("adversary", mode="before")
    @classmethod
    def parse_adversary(cls, v):
        if isinstance(v, str):
            return AdversarySpec.parse(v)
        return v

    @field_validator("noise_mode", mode="before")
    @classmethod
    def parse_noise_mode(cls, v):
        return v.lower() if isinstance(v, str) else v

    @model_validator(mode="after")
    def check_adversary_fits(self) -> "ExperimentConfig":
        spec = self.adversary
        if spec.schedule == "single_site" and not 1 <= (spec.site or 0) <= self.k:
            raise ValueError(f"single_site target must lie in 1..{self.k}")
        if spec.schedule == "weighted" and len(spec.weights) != self.k:
            raise ValueError(f"weighted schedule needs {self.k} weights, got {len(spec.weights)}")
        return self
