from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env")
    LOG_LEVEL: str = "INFO"
    WORKERS: Optional[int] = None
    DATABASE_URL: Optional[str] = None
    RESULTS_DIR: str = "results"
    OBLIVIOUS_C0: float = 2.0
    ERROR_CHECKPOINTS: int = 1024
    AUDIT_MIN_COUNT: int = 100
    BM_PROBE_BUCKET_WIDTH: float = 1.0
    BM_PROBE_MIN_COUNT: int = 100


settings = Settings()
