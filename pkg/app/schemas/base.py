from pydantic import BaseModel, ConfigDict, field_validator


class TrackingBaseModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    @field_validator("alpha", "delta", "beta", mode="after", check_fields=False)
    @classmethod
    def check_unit_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"must lie strictly between 0 and 1, got {v}")
        return v

    @field_validator("k", mode="after", check_fields=False)
    @classmethod
    def check_site_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"at least one site required, got {v}")
        return v
