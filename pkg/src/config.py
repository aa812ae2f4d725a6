from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Environment
    PYTHON_ENV: Literal["development", "staging", "production"] = "production"

    # Logging
    LOG_LEVEL: str | None = None
    LOG_FILE: str | None = None

    # Simulator
    MAX_QUBITS: int = 26

    # Numerical floors
    PROBABILITY_FLOOR: float = 1e-300
    DIVERGENCE_FLOOR: float = 1e-12
    CERTAINTY_TOLERANCE: float = 1e-6
    EQUIVALENCE_TOLERANCE: float = 1e-10

    # SAT
    SAT_ENUMERATION_LIMIT: int = 24
    MAX_GENERATION_ATTEMPTS: int = 50

    # Experiments
    WORKERS: int = 1

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="QPORT_",
        case_sensitive=True,
        extra="ignore",
    )

    # Computed properties
    @property
    def is_development(self) -> bool:
        return self.PYTHON_ENV == "development"

    @property
    def is_production(self) -> bool:
        return self.PYTHON_ENV == "production"

    @property
    def log_level(self) -> str:
        """Explicit LOG_LEVEL, otherwise DEBUG in development and INFO elsewhere"""
        if self.LOG_LEVEL:
            return self.LOG_LEVEL.upper()
        return "DEBUG" if self.is_development else "INFO"


settings: Settings = Settings()
