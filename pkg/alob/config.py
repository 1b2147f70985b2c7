import os

from pydantic_settings import BaseSettings


class AppSettings(BaseSettings):
    name: str = "alob"
    version: str = "0.0.1"


class LogSettings(BaseSettings):
    level: str = "INFO"

    class Config:
        env_prefix = "ALOB_LOG_"


class AnalyticsSettings(BaseSettings):
    bins: int = 20
    batches: int = 20  # batch means for signature plot errors
    max_lag: int = 1000
    dar_order: int = 500

    class Config:
        env_prefix = "ALOB_ANALYTICS_"


class IngestSettings(BaseSettings):
    tick_size: float = 1.0
    dar_order: int = 500

    class Config:
        env_prefix = "ALOB_INGEST_"


class Settings(BaseSettings):
    app: AppSettings = AppSettings()
    log: LogSettings = LogSettings()
    analytics: AnalyticsSettings = AnalyticsSettings()
    ingest: IngestSettings = IngestSettings()
    threads: int = os.cpu_count() or 1

    class Config:
        env_prefix = "ALOB_"
        env_nested_delimiter = "__"


settings = Settings()
