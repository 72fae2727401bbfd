import logging
from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")

    # API Configuration
    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000

    # CORS - comma-separated string
    CORS_ORIGINS: str = "*"

    # Diagnostics
    RESKIT_LOG: str = "WARNING"

    # Engine defaults (CLI flags override per run)
    RESKIT_SEED: int = 20240601
    RESKIT_JOBS: int = 1
    RESKIT_SEARCH_VERTEX_BOUND: int = 14
    RESKIT_DEGREE_RETRIES: int = 64
    RESKIT_POINT_DENOMINATOR: int = 997

    @property
    def cors_origins_list(self) -> List[str]:
        """Convert CORS_ORIGINS string to list"""
        return [origin.strip() for origin in self.CORS_ORIGINS.split(",")]


settings = Settings()


def setup_logging(level: str | None = None) -> None:
    """Configure the root logger from RESKIT_LOG (or an explicit level name)."""
    name = (level or settings.RESKIT_LOG).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.WARNING),
        format="%(asctime)s %(levelname)s [%(name)s] %(message)s",
    )
